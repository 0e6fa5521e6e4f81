//! Relay actor: one AEAD layer per direction, telescoped circuit extension,
//! exit-side reassembly and delivery.

use std::collections::{BTreeSet, HashMap};

use crypto_backends::{Aead256, KemKeypair};

use crate::cell::{handshake_chunks, Cell, Command, Terminal, MAX_CT, TAG_LEN};
use crate::net::{Frame, NetCtx, Node, NodeId};

/// Frame kind tags on the simulated wire.
pub const FRAME_CELL: u8 = 0xC0;
pub const FRAME_DELIVER: u8 = 0xD1;
pub const FRAME_REPLY: u8 = 0xD2;

/// Handshake chunk carried per CREATE cell / EXTEND control.
pub const HANDSHAKE_CHUNK: usize = 400;

const DIR_FWD: u8 = 0;
const DIR_BACK: u8 = 1;

struct CircuitState {
    prev: NodeId,
    next: Option<NodeId>,
    key: Aead256,
    depth: u8,
    fwd_count: u64,
    back_count: u64,
    /// Exit-side fragment reassembly per message id.
    frags: HashMap<u32, FragAccum>,
}

struct FragAccum {
    total: u16,
    chunks: Vec<Option<Vec<u8>>>,
}

struct HandshakeAccum {
    total: u16,
    chunks: Vec<Option<Vec<u8>>>,
}

impl HandshakeAccum {
    fn insert(&mut self, idx: u8, count: u8, chunk: Vec<u8>) -> Option<Vec<u8>> {
        if self.chunks.len() != count as usize || (idx as usize) >= self.chunks.len() {
            return None;
        }
        self.chunks[idx as usize] = Some(chunk);
        if self.chunks.iter().all(|c| c.is_some()) {
            let mut blob = Vec::with_capacity(self.total as usize);
            for c in &self.chunks {
                blob.extend_from_slice(c.as_ref().unwrap());
            }
            if blob.len() == self.total as usize {
                return Some(blob);
            }
        }
        None
    }
}

/// One onion relay. Knows its own KEM keypair and, per circuit, only the
/// previous and next hop.
pub struct RelayNode {
    pub node_id: NodeId,
    keypair: KemKeypair,
    circuits: HashMap<u32, CircuitState>,
    pending_create: HashMap<u32, (NodeId, u8, HandshakeAccum)>,
    pending_extend: HashMap<u32, (NodeId, HandshakeAccum)>,
    /// Every peer this relay has exchanged frames with.
    pub observed_peers: BTreeSet<NodeId>,
    /// Forward layers removed (decryptions between client and exit).
    pub layers_stripped: u64,
    /// Backward layers added.
    pub layers_added: u64,
    pub torn_circuits: Vec<u32>,
}

impl RelayNode {
    pub fn new(node_id: NodeId, keypair: KemKeypair) -> RelayNode {
        RelayNode {
            node_id,
            keypair,
            circuits: HashMap::new(),
            pending_create: HashMap::new(),
            pending_extend: HashMap::new(),
            observed_peers: BTreeSet::new(),
            layers_stripped: 0,
            layers_added: 0,
            torn_circuits: Vec::new(),
        }
    }

    pub fn kem_public(&self) -> &[u8] {
        self.keypair.public_key()
    }

    pub fn knows_circuit(&self) -> bool {
        !self.circuits.is_empty()
    }

    fn teardown(&mut self, circuit_id: u32, ctx: &mut NetCtx) {
        if let Some(state) = self.circuits.remove(&circuit_id) {
            let destroy = Cell { circuit_id, command: Command::Destroy, body: Vec::new() };
            let mut frame = vec![FRAME_CELL];
            frame.extend_from_slice(&destroy.encode());
            ctx.send(state.prev, frame.clone());
            if let Some(next) = state.next {
                ctx.send(next, frame);
            }
        }
        self.torn_circuits.push(circuit_id);
    }

    fn send_cell(&mut self, dst: NodeId, cell: &Cell, ctx: &mut NetCtx) {
        self.observed_peers.insert(dst);
        let mut frame = vec![FRAME_CELL];
        frame.extend_from_slice(&cell.encode());
        ctx.send(dst, frame);
    }

    fn on_create(&mut self, src: NodeId, cell: &Cell, ctx: &mut NetCtx) {
        // CREATE body: total u16 ∥ idx u8 ∥ count u8 ∥ depth u8 ∥ chunk.
        if cell.body.len() < 5 {
            return;
        }
        let total = u16::from_le_bytes(cell.body[..2].try_into().unwrap());
        let (idx, count, depth) = (cell.body[2], cell.body[3], cell.body[4]);
        let chunk = cell.body[5..].to_vec();
        let entry = self.pending_create.entry(cell.circuit_id).or_insert_with(|| {
            (src, depth, HandshakeAccum { total, chunks: vec![None; count as usize] })
        });
        let Some(ct) = entry.2.insert(idx, count, chunk) else { return };
        let (prev, depth, _) = self.pending_create.remove(&cell.circuit_id).unwrap();
        let Ok(shared) = self.keypair.decapsulate(&ct) else {
            self.teardown(cell.circuit_id, ctx);
            return;
        };
        self.observed_peers.insert(prev);
        self.circuits.insert(
            cell.circuit_id,
            CircuitState {
                prev,
                next: None,
                key: Aead256::new(&shared),
                depth,
                fwd_count: 0,
                back_count: 0,
                frags: HashMap::new(),
            },
        );
        let created = Cell { circuit_id: cell.circuit_id, command: Command::Created, body: Vec::new() };
        self.send_cell(prev, &created, ctx);
    }

    fn on_created(&mut self, src: NodeId, cell: &Cell, ctx: &mut NetCtx) {
        // The next hop finished its handshake; acknowledge to our client
        // side with an EXTENDED control sealed under our own key.
        let Some((extended_to, _)) = self.pending_extend.remove(&cell.circuit_id) else { return };
        debug_assert_eq!(extended_to, src);
        let Some(state) = self.circuits.get_mut(&cell.circuit_id) else { return };
        state.next = Some(src);
        self.observed_peers.insert(src);
        let depth = state.depth as usize;
        let plaintext = Terminal::Extended.padded(depth + 1);
        let nonce = Aead256::nonce(DIR_BACK, 0, state.back_count);
        state.back_count += 1;
        let body = state.key.seal(&nonce, &back_aad(cell.circuit_id), &plaintext);
        let reply = Cell { circuit_id: cell.circuit_id, command: Command::OnionBack, body };
        let prev = state.prev;
        self.layers_added += 1;
        self.send_cell(prev, &reply, ctx);
    }

    fn on_onion(&mut self, src: NodeId, cell: &Cell, ctx: &mut NetCtx) {
        let Some(state) = self.circuits.get_mut(&cell.circuit_id) else { return };
        if state.prev != src {
            return;
        }
        let nonce = Aead256::nonce(DIR_FWD, 0, state.fwd_count);
        state.fwd_count += 1;
        let Some(plaintext) = state.key.open(&nonce, &fwd_aad(cell.circuit_id), &cell.body) else {
            // Authentication failure: drop the cell and tear the circuit down.
            self.teardown(cell.circuit_id, ctx);
            return;
        };
        self.layers_stripped += 1;
        match Terminal::parse(&plaintext) {
            None => {
                // Inner ciphertext: forward one hop.
                let Some(next) = state.next else {
                    self.teardown(cell.circuit_id, ctx);
                    return;
                };
                let fwd = Cell { circuit_id: cell.circuit_id, command: Command::Onion, body: plaintext };
                self.send_cell(next, &fwd, ctx);
            }
            Some(Err(_)) => self.teardown(cell.circuit_id, ctx),
            Some(Ok(Terminal::Extend { next, total, idx, count, chunk })) => {
                let accum = self
                    .pending_extend
                    .entry(cell.circuit_id)
                    .or_insert_with(|| {
                        (next, HandshakeAccum { total, chunks: vec![None; count as usize] })
                    });
                if let Some(ct) = accum.1.insert(idx, count, chunk) {
                    let next_node = accum.0;
                    let depth = state.depth;
                    // Keep the pending entry so CREATED can route the ack.
                    for (idx, count, chunk) in handshake_chunks(&ct, HANDSHAKE_CHUNK) {
                        let mut body = Vec::with_capacity(5 + chunk.len());
                        body.extend_from_slice(&(ct.len() as u16).to_le_bytes());
                        body.push(idx);
                        body.push(count);
                        body.push(depth + 1);
                        body.extend_from_slice(&chunk);
                        let create =
                            Cell { circuit_id: cell.circuit_id, command: Command::Create, body };
                        self.send_cell(next_node, &create, ctx);
                    }
                }
            }
            Some(Ok(Terminal::DataFrag { msg_id, idx, total, chunk })) => {
                let accum = state.frags.entry(msg_id).or_insert_with(|| FragAccum {
                    total,
                    chunks: vec![None; total as usize],
                });
                if (idx as usize) < accum.chunks.len() {
                    accum.chunks[idx as usize] = Some(chunk);
                }
                if accum.chunks.iter().all(|c| c.is_some()) {
                    let accum = state.frags.remove(&msg_id).unwrap();
                    let mut message = Vec::new();
                    for c in accum.chunks {
                        message.extend_from_slice(&c.unwrap());
                    }
                    let _ = accum.total;
                    // First four bytes name the destination node.
                    if message.len() < 4 {
                        return;
                    }
                    let dest = u32::from_le_bytes(message[..4].try_into().unwrap());
                    let mut frame = vec![FRAME_DELIVER];
                    frame.extend_from_slice(&cell.circuit_id.to_le_bytes());
                    frame.extend_from_slice(&message[4..]);
                    self.observed_peers.insert(dest);
                    ctx.send(dest, frame);
                }
            }
            Some(Ok(Terminal::Extended)) => self.teardown(cell.circuit_id, ctx),
        }
    }

    fn on_onion_back(&mut self, src: NodeId, cell: &Cell, ctx: &mut NetCtx) {
        let Some(state) = self.circuits.get_mut(&cell.circuit_id) else { return };
        if state.next != Some(src) {
            return;
        }
        if cell.body.len() + TAG_LEN > MAX_CT {
            self.teardown(cell.circuit_id, ctx);
            return;
        }
        let nonce = Aead256::nonce(DIR_BACK, 0, state.back_count);
        state.back_count += 1;
        let body = state.key.seal(&nonce, &back_aad(cell.circuit_id), &cell.body);
        self.layers_added += 1;
        let wrapped = Cell { circuit_id: cell.circuit_id, command: Command::OnionBack, body };
        let prev = state.prev;
        self.send_cell(prev, &wrapped, ctx);
    }

    /// A destination's reply enters the circuit at the exit: fragment, seal
    /// our layer, send backward.
    fn on_reply(&mut self, src: NodeId, bytes: &[u8], ctx: &mut NetCtx) {
        if bytes.len() < 4 {
            return;
        }
        let circuit_id = u32::from_le_bytes(bytes[..4].try_into().unwrap());
        let payload = &bytes[4..];
        let Some(state) = self.circuits.get_mut(&circuit_id) else { return };
        self.observed_peers.insert(src);
        let depth = state.depth as usize;
        let msg_id = state.back_count as u32; // unique per circuit direction
        let chunks: Vec<&[u8]> = if payload.is_empty() {
            vec![&[]]
        } else {
            payload.chunks(crate::cell::DATA_CHUNK).collect()
        };
        let total = chunks.len() as u16;
        let mut out_cells = Vec::with_capacity(chunks.len());
        for (i, chunk) in chunks.into_iter().enumerate() {
            let term = Terminal::DataFrag { msg_id, idx: i as u16, total, chunk: chunk.to_vec() };
            let plaintext = term.padded(depth + 1);
            let nonce = Aead256::nonce(DIR_BACK, 0, state.back_count);
            state.back_count += 1;
            let body = state.key.seal(&nonce, &back_aad(circuit_id), &plaintext);
            out_cells.push(Cell { circuit_id, command: Command::OnionBack, body });
        }
        self.layers_added += out_cells.len() as u64;
        let prev = state.prev;
        for cell in out_cells {
            self.send_cell(prev, &cell, ctx);
        }
    }
}

pub(crate) fn fwd_aad(circuit_id: u32) -> [u8; 5] {
    let mut a = [0u8; 5];
    a[..4].copy_from_slice(&circuit_id.to_le_bytes());
    a[4] = DIR_FWD;
    a
}

pub(crate) fn back_aad(circuit_id: u32) -> [u8; 5] {
    let mut a = [0u8; 5];
    a[..4].copy_from_slice(&circuit_id.to_le_bytes());
    a[4] = DIR_BACK;
    a
}

impl Node for RelayNode {
    fn as_any(&self) -> Option<&dyn std::any::Any> {
        Some(self)
    }

    fn on_frame(&mut self, frame: &Frame, ctx: &mut NetCtx) {
        self.observed_peers.insert(frame.src);
        match frame.bytes.first() {
            Some(&FRAME_CELL) => {
                let Ok(cell) = Cell::decode(&frame.bytes[1..]) else { return };
                match cell.command {
                    Command::Create => self.on_create(frame.src, &cell, ctx),
                    Command::Created => self.on_created(frame.src, &cell, ctx),
                    Command::Onion => self.on_onion(frame.src, &cell, ctx),
                    Command::OnionBack => self.on_onion_back(frame.src, &cell, ctx),
                    Command::Destroy => {
                        self.circuits.remove(&cell.circuit_id);
                        self.torn_circuits.push(cell.circuit_id);
                    }
                }
            }
            Some(&FRAME_REPLY) => self.on_reply(frame.src, &frame.bytes[1..], ctx),
            _ => {}
        }
    }
}

/// Helper for destination nodes: answer a delivered request over a circuit.
pub fn reply_frame(circuit_id: u32, payload: &[u8]) -> Vec<u8> {
    let mut frame = vec![FRAME_REPLY];
    frame.extend_from_slice(&circuit_id.to_le_bytes());
    frame.extend_from_slice(payload);
    frame
}

/// Parse a DELIVER frame at a destination: (circuit id, payload).
pub fn parse_deliver(bytes: &[u8]) -> Option<(u32, &[u8])> {
    if bytes.len() < 5 || bytes[0] != FRAME_DELIVER {
        return None;
    }
    Some((u32::from_le_bytes(bytes[1..5].try_into().unwrap()), &bytes[5..]))
}
