//! Fixed 512-byte cells and the layered payload formats.
//!
//! Cell: circuit_id u32 ∥ command u8 ∥ body[507]. The body carries
//! ct_len u16 ∥ ciphertext ∥ zero pad, so a relay that strips a layer can
//! re-emit a full-size cell for the 16 bytes the tag released.
//!
//! A decrypted layer either IS the next ciphertext (forward it) or starts
//! with the terminal magic and parses as a control or data payload for this
//! hop.

use crate::OnionError;

pub const CELL_LEN: usize = 512;
pub const BODY_LEN: usize = CELL_LEN - 5;
/// Largest ciphertext a body can carry.
pub const MAX_CT: usize = BODY_LEN - 2;
pub const TAG_LEN: usize = 16;
/// Hops in a circuit.
pub const HOPS: usize = 3;

/// Innermost plaintext capacity of a fully wrapped data cell.
pub const INNER_LEN: usize = MAX_CT - HOPS * TAG_LEN;
/// Terminal header: magic(4) ∥ kind(1) ∥ len(2).
const TERM_HEADER: usize = 7;
/// Data fragment header: msg_id(4) ∥ idx(2) ∥ total(2) ∥ chunk_len(2).
const FRAG_HEADER: usize = 10;
/// Message bytes per data cell.
pub const DATA_CHUNK: usize = INNER_LEN - TERM_HEADER - FRAG_HEADER;

const TERM_MAGIC: &[u8; 4] = b"ONTM";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Create = 1,
    Created = 2,
    /// Layered cell moving client → exit.
    Onion = 3,
    /// Layered cell moving exit → client.
    OnionBack = 4,
    Destroy = 5,
}

impl Command {
    pub fn from_u8(v: u8) -> Option<Command> {
        match v {
            1 => Some(Command::Create),
            2 => Some(Command::Created),
            3 => Some(Command::Onion),
            4 => Some(Command::OnionBack),
            5 => Some(Command::Destroy),
            _ => None,
        }
    }
}

/// One wire cell; always serializes to exactly [`CELL_LEN`] bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub circuit_id: u32,
    pub command: Command,
    /// Meaning depends on command: ciphertext for onion cells, handshake
    /// chunk for create cells.
    pub body: Vec<u8>,
}

impl Cell {
    pub fn encode(&self) -> Vec<u8> {
        debug_assert!(self.body.len() <= MAX_CT);
        let mut out = Vec::with_capacity(CELL_LEN);
        out.extend_from_slice(&self.circuit_id.to_le_bytes());
        out.push(self.command as u8);
        out.extend_from_slice(&(self.body.len() as u16).to_le_bytes());
        out.extend_from_slice(&self.body);
        out.resize(CELL_LEN, 0);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Cell, OnionError> {
        if bytes.len() != CELL_LEN {
            return Err(OnionError::Frame(format!("cell is {} bytes, not {CELL_LEN}", bytes.len())));
        }
        let circuit_id = u32::from_le_bytes(bytes[..4].try_into().unwrap());
        let command = Command::from_u8(bytes[4])
            .ok_or_else(|| OnionError::Frame(format!("unknown command {}", bytes[4])))?;
        let len = u16::from_le_bytes(bytes[5..7].try_into().unwrap()) as usize;
        if len > MAX_CT {
            return Err(OnionError::Frame("body length exceeds cell".into()));
        }
        Ok(Cell { circuit_id, command, body: bytes[7..7 + len].to_vec() })
    }
}

/// Terminal payload kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Terminal {
    /// Ask this hop to extend the circuit: (next node, handshake chunk).
    Extend { next: u32, total: u16, idx: u8, count: u8, chunk: Vec<u8> },
    /// Extension acknowledged.
    Extended,
    /// A fragment of an application message.
    DataFrag { msg_id: u32, idx: u16, total: u16, chunk: Vec<u8> },
}

impl Terminal {
    pub fn encode(&self) -> Vec<u8> {
        let (kind, payload): (u8, Vec<u8>) = match self {
            Terminal::Extend { next, total, idx, count, chunk } => {
                let mut p = Vec::with_capacity(8 + chunk.len());
                p.extend_from_slice(&next.to_le_bytes());
                p.extend_from_slice(&total.to_le_bytes());
                p.push(*idx);
                p.push(*count);
                p.extend_from_slice(chunk);
                (1, p)
            }
            Terminal::Extended => (2, Vec::new()),
            Terminal::DataFrag { msg_id, idx, total, chunk } => {
                let mut p = Vec::with_capacity(FRAG_HEADER + chunk.len());
                p.extend_from_slice(&msg_id.to_le_bytes());
                p.extend_from_slice(&idx.to_le_bytes());
                p.extend_from_slice(&total.to_le_bytes());
                p.extend_from_slice(&(chunk.len() as u16).to_le_bytes());
                p.extend_from_slice(chunk);
                (3, p)
            }
        };
        let mut out = Vec::with_capacity(TERM_HEADER + payload.len());
        out.extend_from_slice(TERM_MAGIC);
        out.push(kind);
        out.extend_from_slice(&(payload.len() as u16).to_le_bytes());
        out.extend_from_slice(&payload);
        out
    }

    /// `None` when the bytes are not terminal (an inner ciphertext to
    /// forward), `Some(Err)` on a malformed terminal payload.
    pub fn parse(bytes: &[u8]) -> Option<Result<Terminal, OnionError>> {
        if bytes.len() < TERM_HEADER || &bytes[..4] != TERM_MAGIC {
            return None;
        }
        let kind = bytes[4];
        let len = u16::from_le_bytes(bytes[5..7].try_into().unwrap()) as usize;
        if bytes.len() < TERM_HEADER + len {
            return Some(Err(OnionError::Frame("terminal payload truncated".into())));
        }
        let p = &bytes[TERM_HEADER..TERM_HEADER + len];
        let parsed = match kind {
            1 => {
                if p.len() < 8 {
                    return Some(Err(OnionError::Frame("extend too short".into())));
                }
                Terminal::Extend {
                    next: u32::from_le_bytes(p[..4].try_into().unwrap()),
                    total: u16::from_le_bytes(p[4..6].try_into().unwrap()),
                    idx: p[6],
                    count: p[7],
                    chunk: p[8..].to_vec(),
                }
            }
            2 => Terminal::Extended,
            3 => {
                if p.len() < FRAG_HEADER {
                    return Some(Err(OnionError::Frame("fragment too short".into())));
                }
                let chunk_len = u16::from_le_bytes(p[8..10].try_into().unwrap()) as usize;
                if p.len() < FRAG_HEADER + chunk_len {
                    return Some(Err(OnionError::Frame("fragment truncated".into())));
                }
                Terminal::DataFrag {
                    msg_id: u32::from_le_bytes(p[..4].try_into().unwrap()),
                    idx: u16::from_le_bytes(p[4..6].try_into().unwrap()),
                    total: u16::from_le_bytes(p[6..8].try_into().unwrap()),
                    chunk: p[10..10 + chunk_len].to_vec(),
                }
            }
            _ => return Some(Err(OnionError::Frame(format!("unknown terminal kind {kind}")))),
        };
        Some(Ok(parsed))
    }

    /// Pad a terminal plaintext to the fixed size expected at `depth` layers
    /// of wrapping (depth 1 = addressed to the entry).
    pub fn padded(&self, depth: usize) -> Vec<u8> {
        let mut bytes = self.encode();
        bytes.resize(MAX_CT - depth * TAG_LEN, 0);
        bytes
    }
}

/// Split a handshake blob into CREATE/EXTEND-sized chunks.
pub fn handshake_chunks(blob: &[u8], chunk: usize) -> Vec<(u8, u8, Vec<u8>)> {
    let count = blob.len().div_ceil(chunk).max(1) as u8;
    (0..count)
        .map(|i| {
            let lo = i as usize * chunk;
            let hi = (lo + chunk).min(blob.len());
            (i, count, blob[lo..hi].to_vec())
        })
        .collect()
}
