//! On-disk replica format.
//!
//! Layout, little-endian throughout:
//! magic "QPDB" ∥ version u16 ∥ r u32 ∥ b u32 ∥ scheme-id u8 ∥ pow-kind u8 ∥
//! row-major payload ∥ 32-byte payload digest.

use std::io::{Read, Write};
use std::path::Path;

use parallel_kernels::BitMatrix;

use crate::matrix::DbMatrix;
use crate::DbError;

const MAGIC: &[u8; 4] = b"QPDB";
const VERSION: u16 = 1;

/// PIR scheme this replica is deployed under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeId {
    Unassigned = 0,
    Ens = 1,
    Ftr = 2,
    Oop = 3,
}

impl SchemeId {
    pub fn from_tag(t: u8) -> Option<SchemeId> {
        match t {
            0 => Some(SchemeId::Unassigned),
            1 => Some(SchemeId::Ens),
            2 => Some(SchemeId::Ftr),
            3 => Some(SchemeId::Oop),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DbFileHeader {
    pub rows: u32,
    pub block_bits: u32,
    pub scheme: SchemeId,
    /// 0 when no puzzles are bound; otherwise the pow kind tag.
    pub pow_kind: u8,
}

pub fn db_save(db: &DbMatrix, header: &DbFileHeader, path: &Path) -> Result<(), DbError> {
    if header.rows as usize != db.rows() || header.block_bits as usize != db.block_bits() {
        return Err(DbError::Format("header does not match matrix geometry".into()));
    }
    let payload = db.bit_matrix().to_row_major_bytes();
    let digest = db.payload_digest();
    let mut f = std::fs::File::create(path).map_err(|e| DbError::Io(e.to_string()))?;
    let mut head = Vec::with_capacity(16);
    head.extend_from_slice(MAGIC);
    head.extend_from_slice(&VERSION.to_le_bytes());
    head.extend_from_slice(&header.rows.to_le_bytes());
    head.extend_from_slice(&header.block_bits.to_le_bytes());
    head.push(header.scheme as u8);
    head.push(header.pow_kind);
    f.write_all(&head).map_err(|e| DbError::Io(e.to_string()))?;
    f.write_all(&payload).map_err(|e| DbError::Io(e.to_string()))?;
    f.write_all(&digest).map_err(|e| DbError::Io(e.to_string()))?;
    Ok(())
}

pub fn db_load(path: &Path) -> Result<(DbMatrix, DbFileHeader), DbError> {
    let mut f = std::fs::File::open(path).map_err(|e| DbError::Io(e.to_string()))?;
    let mut bytes = Vec::new();
    f.read_to_end(&mut bytes).map_err(|e| DbError::Io(e.to_string()))?;
    if bytes.len() < 16 + 32 {
        return Err(DbError::Format("file shorter than header + footer".into()));
    }
    if &bytes[..4] != MAGIC {
        return Err(DbError::Format("bad magic".into()));
    }
    let version = u16::from_le_bytes(bytes[4..6].try_into().unwrap());
    if version != VERSION {
        return Err(DbError::Format(format!("unsupported version {version}")));
    }
    let rows = u32::from_le_bytes(bytes[6..10].try_into().unwrap());
    let block_bits = u32::from_le_bytes(bytes[10..14].try_into().unwrap());
    let scheme = SchemeId::from_tag(bytes[14])
        .ok_or_else(|| DbError::Format(format!("unknown scheme id {}", bytes[14])))?;
    let pow_kind = bytes[15];
    if block_bits == 0 || block_bits % 64 != 0 {
        return Err(DbError::Format("block bits must be a positive multiple of 64".into()));
    }
    let payload_len = rows as usize * (block_bits as usize / 8);
    let expected = 16 + payload_len + 32;
    if bytes.len() != expected {
        return Err(DbError::Format(format!(
            "file length {} != expected {expected} (truncated or padded)",
            bytes.len()
        )));
    }
    let payload = &bytes[16..16 + payload_len];
    let bits = BitMatrix::from_row_bytes(rows as usize, block_bits as usize, payload);
    let db = DbMatrix::from_bit_matrix(bits)?;
    let digest = &bytes[16 + payload_len..];
    if digest != db.payload_digest() {
        return Err(DbError::Format("payload digest mismatch".into()));
    }
    Ok((db, DbFileHeader { rows, block_bits, scheme, pow_kind }))
}
