//! Block layout: record ∥ validity window ∥ puzzles ∥ issuer signature ∥ pad.

use pow::PowKind;

use crate::record::{SpectrumRecord, RECORD_BYTES};
use crate::DbError;

/// A puzzle embedded in a block, tagged with its family and difficulty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundPuzzle {
    pub kind: PowKind,
    pub kappa: u32,
    pub bytes: Vec<u8>,
}

/// Decoded content of one database block.
#[derive(Debug, Clone, PartialEq)]
pub struct DbEntryBlock {
    pub record: SpectrumRecord,
    /// Validity window the puzzles were bound for.
    pub window_id: u64,
    pub puzzles: Vec<BoundPuzzle>,
    /// Issuer signature over (θ ∥ puzzle section ∥ window); empty until bound.
    pub issuer_sig: Vec<u8>,
}

impl DbEntryBlock {
    pub fn unbound(record: SpectrumRecord) -> Self {
        DbEntryBlock { record, window_id: 0, puzzles: Vec::new(), issuer_sig: Vec::new() }
    }

    /// Serialized length before padding.
    pub fn encoded_len(&self) -> usize {
        RECORD_BYTES
            + 8
            + 1
            + self.puzzles.iter().map(|p| 9 + p.bytes.len()).sum::<usize>()
            + 4
            + self.issuer_sig.len()
    }

    /// The puzzle section bytes that the issuer signature covers.
    pub fn puzzle_section(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.push(self.puzzles.len() as u8);
        for p in &self.puzzles {
            out.push(p.kind.tag());
            out.extend_from_slice(&p.kappa.to_le_bytes());
            out.extend_from_slice(&(p.bytes.len() as u32).to_le_bytes());
            out.extend_from_slice(&p.bytes);
        }
        out
    }

    /// Encode into exactly `capacity` bytes (zero padded).
    pub fn encode(&self, capacity: usize) -> Result<Vec<u8>, DbError> {
        let needed = self.encoded_len();
        if needed > capacity {
            return Err(DbError::Capacity { needed, capacity });
        }
        if self.puzzles.len() > u8::MAX as usize {
            return Err(DbError::Block("too many puzzles in one block".into()));
        }
        let mut out = Vec::with_capacity(capacity);
        out.extend_from_slice(&self.record.encode()?);
        out.extend_from_slice(&self.window_id.to_le_bytes());
        out.extend_from_slice(&self.puzzle_section());
        out.extend_from_slice(&(self.issuer_sig.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.issuer_sig);
        out.resize(capacity, 0);
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<DbEntryBlock, DbError> {
        let record = SpectrumRecord::decode(bytes)?;
        let mut cur = RECORD_BYTES;
        let window_id = u64::from_le_bytes(
            bytes
                .get(cur..cur + 8)
                .ok_or_else(|| DbError::Block("truncated window".into()))?
                .try_into()
                .unwrap(),
        );
        cur += 8;
        let count = *bytes.get(cur).ok_or_else(|| DbError::Block("truncated puzzle count".into()))?;
        cur += 1;
        let mut puzzles = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let head = bytes
                .get(cur..cur + 9)
                .ok_or_else(|| DbError::Block("truncated puzzle header".into()))?;
            let kind = PowKind::from_tag(head[0])
                .ok_or_else(|| DbError::Block(format!("unknown puzzle kind {}", head[0])))?;
            let kappa = u32::from_le_bytes(head[1..5].try_into().unwrap());
            let len = u32::from_le_bytes(head[5..9].try_into().unwrap()) as usize;
            cur += 9;
            let body = bytes
                .get(cur..cur + len)
                .ok_or_else(|| DbError::Block("truncated puzzle body".into()))?;
            cur += len;
            puzzles.push(BoundPuzzle { kind, kappa, bytes: body.to_vec() });
        }
        let sig_len = u32::from_le_bytes(
            bytes
                .get(cur..cur + 4)
                .ok_or_else(|| DbError::Block("truncated signature length".into()))?
                .try_into()
                .unwrap(),
        ) as usize;
        cur += 4;
        let issuer_sig = bytes
            .get(cur..cur + sig_len)
            .ok_or_else(|| DbError::Block("truncated signature".into()))?
            .to_vec();
        Ok(DbEntryBlock { record, window_id, puzzles, issuer_sig })
    }
}

/// Message covered by the issuer signature: θ ∥ validity window ∥ puzzle
/// section. Shared by binding, refresh, and token verification.
pub fn puzzle_signing_message(theta: u64, window_id: u64, puzzle_section: &[u8]) -> Vec<u8> {
    let mut msg = Vec::with_capacity(16 + puzzle_section.len());
    msg.extend_from_slice(&theta.to_le_bytes());
    msg.extend_from_slice(&window_id.to_le_bytes());
    msg.extend_from_slice(puzzle_section);
    msg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridCoordinate;

    fn record() -> SpectrumRecord {
        SpectrumRecord {
            coord: GridCoordinate { cell_x: 1, cell_y: 2 },
            channel: 3,
            time_window: 0,
            eirp_centi_dbm: 3600,
            available: true,
            aux: vec![7; 10],
        }
    }

    #[test]
    fn block_roundtrip_with_padding() {
        let block = DbEntryBlock {
            record: record(),
            window_id: 42,
            puzzles: vec![BoundPuzzle { kind: PowKind::Hct, kappa: 12, bytes: vec![9; 37] }],
            issuer_sig: vec![1; 64],
        };
        let bytes = block.encode(1024).unwrap();
        assert_eq!(bytes.len(), 1024);
        assert_eq!(DbEntryBlock::decode(&bytes).unwrap(), block);
    }

    #[test]
    fn capacity_error_reports_needed_size() {
        let block = DbEntryBlock {
            record: record(),
            window_id: 0,
            puzzles: vec![BoundPuzzle { kind: PowKind::Lbp, kappa: 20, bytes: vec![0; 2000] }],
            issuer_sig: vec![0; 2420],
        };
        match block.encode(1024) {
            Err(DbError::Capacity { needed, capacity: 1024 }) => assert!(needed > 1024),
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
