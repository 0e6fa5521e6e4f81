//! The r × b block matrix and periodic puzzle binding.

use crypto_backends::{sha256_tagged, SigKeypair};
use parallel_kernels::BitMatrix;
use pow::{hct, lbp, PowKind, Puzzle};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::block::{puzzle_signing_message, BoundPuzzle, DbEntryBlock};
use crate::record::SpectrumRecord;
use crate::{db_index, DbError, IndexDims};

/// Immutable spectrum database: every reader shares it; rebinding produces a
/// fresh matrix so in-flight queries never observe torn state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DbMatrix {
    rows: usize,
    block_bits: usize,
    bits: BitMatrix,
}

impl DbMatrix {
    /// Rows must decode as blocks, so `block_bits` is fixed per database and
    /// must be a multiple of 64 for the packed kernels.
    pub fn from_bit_matrix(bits: BitMatrix) -> Result<DbMatrix, DbError> {
        if bits.cols() % 64 != 0 || bits.cols() == 0 {
            return Err(DbError::Dimension {
                field: "block_bits",
                value: bits.cols() as u64,
                limit: u64::MAX,
            });
        }
        Ok(DbMatrix { rows: bits.rows(), block_bits: bits.cols(), bits })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Block size in bits (b).
    pub fn block_bits(&self) -> usize {
        self.block_bits
    }

    /// Words per row over the 8-bit word packing (s_DB).
    pub fn words_per_row(&self) -> usize {
        self.block_bits / 8
    }

    pub fn block_bytes(&self) -> usize {
        self.block_bits / 8
    }

    pub fn bit_matrix(&self) -> &BitMatrix {
        &self.bits
    }

    pub fn row_bytes(&self, theta: usize) -> Vec<u8> {
        self.bits.row_bytes(theta)
    }

    pub fn decode_block(&self, theta: usize) -> Result<DbEntryBlock, DbError> {
        DbEntryBlock::decode(&self.row_bytes(theta))
    }

    /// Payload digest used by the file footer and replica comparison.
    pub fn payload_digest(&self) -> [u8; 32] {
        sha256_tagged("spectrum-db-payload", &[&self.bits.to_row_major_bytes()])
    }
}

/// Build an unbound database from records. Records must cover each index at
/// most once; missing indices become unavailable placeholder entries.
pub fn build_matrix(
    records: &[SpectrumRecord],
    dims: &IndexDims,
    block_bits: usize,
) -> Result<DbMatrix, DbError> {
    let rows = dims.total_rows();
    if block_bits % 64 != 0 || block_bits == 0 {
        return Err(DbError::Dimension {
            field: "block_bits",
            value: block_bits as u64,
            limit: u64::MAX,
        });
    }
    let capacity = block_bits / 8;
    let mut by_theta: Vec<Option<&SpectrumRecord>> = vec![None; rows];
    for r in records {
        let theta = db_index(r.coord, r.channel, r.time_window, dims)?;
        by_theta[theta] = Some(r);
    }
    let mut bits = BitMatrix::zero(rows, block_bits);
    for (theta, slot) in by_theta.iter().enumerate() {
        let record = match slot {
            Some(r) => (*r).clone(),
            None => placeholder_record(theta, dims)?,
        };
        let block = DbEntryBlock::unbound(record);
        bits.set_row_bytes(theta, &block.encode(capacity)?);
    }
    DbMatrix::from_bit_matrix(bits)
}

fn placeholder_record(theta: usize, dims: &IndexDims) -> Result<SpectrumRecord, DbError> {
    let (coord, channel, time_window) = crate::db_unindex(theta, dims)?;
    Ok(SpectrumRecord {
        coord,
        channel,
        time_window,
        eirp_centi_dbm: 0,
        available: false,
        aux: Vec::new(),
    })
}

/// Binding parameters. The seed makes binding deterministic so synchronized
/// replicas produce bitwise-identical matrices.
#[derive(Debug, Clone)]
pub struct BindConfig {
    pub pow_kind: PowKind,
    /// One fresh puzzle is generated per listed difficulty.
    pub difficulties: Vec<u32>,
    pub window_id: u64,
    pub bind_seed: [u8; 32],
}

/// Bind fresh puzzles and an issuer signature into every block, replacing
/// whatever a previous binding left there. An empty difficulty list returns
/// the database unchanged.
pub fn puzzle_bind(db: &DbMatrix, signer: &SigKeypair, cfg: &BindConfig) -> Result<DbMatrix, DbError> {
    if cfg.difficulties.is_empty() {
        return Ok(db.clone());
    }
    let capacity = db.block_bytes();
    let mut bits = db.bit_matrix().clone();
    for theta in 0..db.rows() {
        let mut block = db.decode_block(theta)?;
        let row_seed = sha256_tagged(
            "puzzle-bind-row",
            &[&cfg.bind_seed, &(theta as u64).to_le_bytes(), &cfg.window_id.to_le_bytes()],
        );
        let mut rng = ChaCha12Rng::from_seed(row_seed);
        block.puzzles.clear();
        for &kappa in &cfg.difficulties {
            let puzzle = match cfg.pow_kind {
                PowKind::Hct => Puzzle::Hct(
                    hct::hct_gen(kappa, hct::DEFAULT_LEAVES, &mut rng)
                        .map_err(|e| DbError::Block(e.to_string()))?,
                ),
                PowKind::Lbp => Puzzle::Lbp(
                    lbp::lbp_gen(lbp::dim_for_kappa(kappa), &mut rng)
                        .map_err(|e| DbError::Block(e.to_string()))?,
                ),
            };
            block.puzzles.push(BoundPuzzle {
                kind: cfg.pow_kind,
                kappa,
                bytes: puzzle.to_bytes(),
            });
        }
        block.window_id = cfg.window_id;
        let msg = puzzle_signing_message(theta as u64, cfg.window_id, &block.puzzle_section());
        block.issuer_sig = signer.sign(&msg);
        bits.set_row_bytes(theta, &block.encode(capacity)?);
    }
    DbMatrix::from_bit_matrix(bits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::GridCoordinate;
    use crypto_backends::{sig, SigBackend};

    fn dims() -> IndexDims {
        IndexDims { n_cols: 2, n_rows: 2, n_ch: 1, n_tv: 1 }
    }

    fn records() -> Vec<SpectrumRecord> {
        (0..4)
            .map(|i| SpectrumRecord {
                coord: GridCoordinate { cell_x: i % 2, cell_y: i / 2 },
                channel: 0,
                time_window: 0,
                eirp_centi_dbm: 3000 + i as i32,
                available: true,
                aux: vec![i as u8; 8],
            })
            .collect()
    }

    fn signer() -> SigKeypair {
        SigKeypair::from_seed(SigBackend::InsecureStub, [9u8; 32])
    }

    #[test]
    fn empty_difficulty_list_is_noop() {
        let db = build_matrix(&records(), &dims(), 64 * 128).unwrap();
        let cfg = BindConfig {
            pow_kind: PowKind::Hct,
            difficulties: vec![],
            window_id: 1,
            bind_seed: [0; 32],
        };
        let bound = puzzle_bind(&db, &signer(), &cfg).unwrap();
        assert_eq!(bound, db);
    }

    #[test]
    fn binding_signs_every_row_and_rebinding_replaces() {
        let db = build_matrix(&records(), &dims(), 64 * 512).unwrap();
        let signer = signer();
        let cfg = BindConfig {
            pow_kind: PowKind::Hct,
            difficulties: vec![4],
            window_id: 7,
            bind_seed: [1; 32],
        };
        let bound = puzzle_bind(&db, &signer, &cfg).unwrap();
        for theta in 0..bound.rows() {
            let block = bound.decode_block(theta).unwrap();
            assert_eq!(block.puzzles.len(), 1);
            assert_eq!(block.window_id, 7);
            let msg = puzzle_signing_message(theta as u64, 7, &block.puzzle_section());
            sig::verify(signer.backend(), signer.public_key(), &msg, &block.issuer_sig).unwrap();
        }

        // Re-binding for the next window invalidates old signatures.
        let cfg2 = BindConfig { window_id: 8, bind_seed: [2; 32], ..cfg };
        let rebound = puzzle_bind(&bound, &signer, &cfg2).unwrap();
        let old = bound.decode_block(0).unwrap();
        let new = rebound.decode_block(0).unwrap();
        assert_ne!(old.puzzles, new.puzzles);
        let stale_msg = puzzle_signing_message(0, new.window_id, &old.puzzle_section());
        assert!(sig::verify(signer.backend(), signer.public_key(), &stale_msg, &old.issuer_sig).is_err());
    }

    #[test]
    fn replicas_with_same_seed_are_bitwise_identical() {
        let cfg = BindConfig {
            pow_kind: PowKind::Hct,
            difficulties: vec![2, 4],
            window_id: 3,
            bind_seed: [5; 32],
        };
        let a = puzzle_bind(&build_matrix(&records(), &dims(), 64 * 512).unwrap(), &signer(), &cfg).unwrap();
        let b = puzzle_bind(&build_matrix(&records(), &dims(), 64 * 512).unwrap(), &signer(), &cfg).unwrap();
        assert_eq!(a.payload_digest(), b.payload_digest());
        assert_eq!(a, b);
    }

    #[test]
    fn oversized_puzzle_reports_capacity() {
        // A lattice puzzle at κ=20 (dimension 69, ~5 KB) cannot fit a 1 KB block.
        let db = build_matrix(&records(), &dims(), 64 * 128).unwrap();
        let cfg = BindConfig {
            pow_kind: PowKind::Lbp,
            difficulties: vec![20],
            window_id: 1,
            bind_seed: [0; 32],
        };
        match puzzle_bind(&db, &signer(), &cfg) {
            Err(DbError::Capacity { .. }) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
    }
}
