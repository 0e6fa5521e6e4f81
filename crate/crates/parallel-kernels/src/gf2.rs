//! GF(2) batched query × database kernel (XOR row folding).
//!
//! The data-parallel path partitions the output into (query-group,
//! column-lane) tiles and sweeps the shared row dimension once per tile.
//! Two inner strategies serve a tile:
//!
//! * a row sweep that conditionally fetches each selected row (the branchy
//!   fetch; a branchless masked variant sits behind [`RowFetchPolicy`] for
//!   benchmarking), used for small batches;
//! * for real batches, a subset-table sweep: rows are consumed in chunks of
//!   six, the 64 subset XORs of a chunk are tabulated once in Gray-code
//!   order, and every query in the group folds its chunk selector through
//!   the table. Each database row is then read once per group and the XOR
//!   volume drops by roughly half at a 128-query batch, which is what the
//!   GPU kernel's shared-memory row broadcast buys on a warp.
//!
//! Both strategies produce bit-exact identical output to the scalar
//! reference for every input, independent of worker count: XOR is
//! associative and commutative and each tile owns its output words.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::bitmat::BitMatrix;
use crate::pool::run_tiles;
use crate::KernelError;

/// Words of a database row processed per tile (32 words = 2048 bit columns).
const LANE_WORDS: usize = 32;
/// Queries kept resident per tile pass; bounds the accumulator slab.
const QUERY_GROUP: usize = 128;
/// Rows folded per subset table.
const CHUNK_ROWS: usize = 6;
/// Batches at least this large use the subset-table sweep.
const SUBSET_MIN_BATCH: usize = 16;

/// How a tile treats rows whose query bit is clear.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RowFetchPolicy {
    /// Skip unselected rows entirely (conditional fetch). Default.
    #[default]
    Branchy,
    /// Always fetch and mask with 0/!0. Kept behind this flag for
    /// benchmarking; forces the row-sweep path.
    Bitmask,
}

/// A batch of GF(2) queries against one bit-matrix database.
pub struct BatchGf2Job<'a> {
    /// q̄ × r query bits; row i selects database rows for query i.
    pub queries: &'a BitMatrix,
    /// r × b database bits.
    pub db: &'a BitMatrix,
    pub policy: RowFetchPolicy,
}

impl<'a> BatchGf2Job<'a> {
    pub fn new(queries: &'a BitMatrix, db: &'a BitMatrix) -> Self {
        BatchGf2Job { queries, db, policy: RowFetchPolicy::default() }
    }

    pub fn check(&self) -> Result<(), KernelError> {
        if self.queries.cols() != self.db.rows() {
            return Err(KernelError::Geometry(format!(
                "query length {} != database rows {}",
                self.queries.cols(),
                self.db.rows()
            )));
        }
        Ok(())
    }
}

/// Reference path: fold the database rows selected by one query.
pub fn scalar_matvec_gf2(query_words: &[u64], db: &BitMatrix) -> Vec<u64> {
    let mut acc = vec![0u64; db.words_per_row()];
    for r in 0..db.rows() {
        if (query_words[r / 64] >> (r % 64)) & 1 == 1 {
            for (a, w) in acc.iter_mut().zip(db.row_words(r)) {
                *a ^= *w;
            }
        }
    }
    acc
}

/// Data-parallel batched fold. Bit-exact equal to the scalar reference for
/// every input; output is independent of `workers`.
pub fn batch_matvec_gf2(job: &BatchGf2Job, workers: usize) -> Result<BitMatrix, KernelError> {
    job.check()?;
    let q_total = job.queries.rows();
    let rows = job.db.rows();
    let out_words = job.db.words_per_row();
    let mut out = BitMatrix::zero(q_total, job.db.cols());
    if q_total == 0 || rows == 0 || out_words == 0 {
        return Ok(out);
    }

    let lane_tiles = out_words.div_ceil(LANE_WORDS);
    let groups = q_total.div_ceil(QUERY_GROUP);
    let out_cells: Vec<AtomicU64> = (0..q_total * out_words).map(|_| AtomicU64::new(0)).collect();

    let use_subset = job.policy == RowFetchPolicy::Branchy && q_total >= SUBSET_MIN_BATCH;
    // Query selectors are transposed once up front; every lane tile of a
    // group reads the same slab.
    let chunks = rows.div_ceil(CHUNK_ROWS);
    let selectors: Vec<GroupSelectors> = (0..groups)
        .map(|g| {
            let group_start = g * QUERY_GROUP;
            let group_len = QUERY_GROUP.min(q_total - group_start);
            if use_subset {
                GroupSelectors::Chunked(chunk_selectors(job, group_start, group_len, chunks))
            } else {
                GroupSelectors::PerRow(row_selectors(job, group_start, group_len))
            }
        })
        .collect();

    run_tiles(groups * lane_tiles, workers, |tile| {
        let g = tile / lane_tiles;
        let group_start = g * QUERY_GROUP;
        let group_len = QUERY_GROUP.min(q_total - group_start);
        let lane0 = (tile % lane_tiles) * LANE_WORDS;
        let lane_w = LANE_WORDS.min(out_words - lane0);
        let mut acc = vec![0u64; group_len * LANE_WORDS];
        match &selectors[g] {
            GroupSelectors::Chunked(idx) => {
                subset_sweep(job, idx, group_len, lane0, lane_w, &mut acc)
            }
            GroupSelectors::PerRow(sel) => {
                row_sweep(job, sel, group_len, lane0, lane_w, &mut acc)
            }
        }
        for gi in 0..group_len {
            let q = group_start + gi;
            for k in 0..lane_w {
                out_cells[q * out_words + lane0 + k]
                    .store(acc[gi * LANE_WORDS + k], Ordering::Relaxed);
            }
        }
    });

    for q in 0..q_total {
        let dst = out.row_words_mut(q);
        for (k, d) in dst.iter_mut().enumerate() {
            *d = out_cells[q * out_words + k].load(Ordering::Relaxed);
        }
    }
    Ok(out)
}

enum GroupSelectors {
    /// One bit per group member per row.
    PerRow(Vec<u128>),
    /// One 6-bit chunk selector per group member, chunk-major.
    Chunked(Vec<u8>),
}

fn row_selectors(job: &BatchGf2Job, group_start: usize, group_len: usize) -> Vec<u128> {
    let rows = job.db.rows();
    let mut sel = vec![0u128; rows];
    for (gi, q) in (group_start..group_start + group_len).enumerate() {
        let qw = job.queries.row_words(q);
        for (r, s) in sel.iter_mut().enumerate() {
            *s |= (((qw[r / 64] >> (r % 64)) & 1) as u128) << gi;
        }
    }
    sel
}

fn chunk_selectors(job: &BatchGf2Job, group_start: usize, group_len: usize, chunks: usize) -> Vec<u8> {
    let rows = job.db.rows();
    let mut idx = vec![0u8; chunks * group_len];
    for (gi, q) in (group_start..group_start + group_len).enumerate() {
        let qw = job.queries.row_words(q);
        for r in 0..rows {
            let bit = (qw[r / 64] >> (r % 64)) & 1;
            idx[(r / CHUNK_ROWS) * group_len + gi] |= (bit as u8) << (r % CHUNK_ROWS);
        }
    }
    idx
}

/// Row sweep with per-row selector bits for the resident query group.
fn row_sweep(
    job: &BatchGf2Job,
    sel: &[u128],
    group_len: usize,
    lane0: usize,
    lane_w: usize,
    acc: &mut [u64],
) {
    let rows = job.db.rows();
    for r in 0..rows {
        let sw = sel[r];
        match job.policy {
            RowFetchPolicy::Branchy => {
                if sw != 0 {
                    let lane = &job.db.row_words(r)[lane0..lane0 + lane_w];
                    let mut bits = sw;
                    while bits != 0 {
                        let gi = bits.trailing_zeros() as usize;
                        bits &= bits - 1;
                        let dst = &mut acc[gi * LANE_WORDS..gi * LANE_WORDS + lane_w];
                        for (a, w) in dst.iter_mut().zip(lane) {
                            *a ^= *w;
                        }
                    }
                }
            }
            RowFetchPolicy::Bitmask => {
                let lane = &job.db.row_words(r)[lane0..lane0 + lane_w];
                for gi in 0..group_len {
                    let mask = 0u64.wrapping_sub(((sw >> gi) & 1) as u64);
                    let dst = &mut acc[gi * LANE_WORDS..gi * LANE_WORDS + lane_w];
                    for (a, w) in dst.iter_mut().zip(lane) {
                        *a ^= *w & mask;
                    }
                }
            }
        }
    }
}

/// Subset-table sweep: Gray-code tabulation of chunk XORs shared by the
/// whole query group.
fn subset_sweep(
    job: &BatchGf2Job,
    idx: &[u8],
    group_len: usize,
    lane0: usize,
    lane_w: usize,
    acc: &mut [u64],
) {
    let rows = job.db.rows();
    let chunks = rows.div_ceil(CHUNK_ROWS);
    let mut table = vec![[0u64; LANE_WORDS]; 1 << CHUNK_ROWS];
    for c in 0..chunks {
        let r0 = c * CHUNK_ROWS;
        let cr = CHUNK_ROWS.min(rows - r0);
        // table[m] = XOR of the chunk rows whose bit is set in m, filled in
        // Gray-code order so each entry costs one row XOR off the previous.
        table[0] = [0u64; LANE_WORDS];
        let mut prev = 0usize;
        for i in 1usize..1 << cr {
            let gray = i ^ (i >> 1);
            let changed = i.trailing_zeros() as usize;
            let row = &job.db.row_words(r0 + changed)[lane0..lane0 + lane_w];
            let (src, dst): (&[u64; LANE_WORDS], &mut [u64; LANE_WORDS]) = if prev < gray {
                let (lo, hi) = table.split_at_mut(gray);
                (&lo[prev], &mut hi[0])
            } else {
                let (lo, hi) = table.split_at_mut(prev);
                (&hi[0], &mut lo[gray])
            };
            for (k, w) in row.iter().enumerate() {
                dst[k] = src[k] ^ w;
            }
            prev = gray;
        }
        let sel = &idx[c * group_len..(c + 1) * group_len];
        for (gi, &m) in sel.iter().enumerate() {
            if m != 0 {
                let t = &table[m as usize];
                let dst = &mut acc[gi * LANE_WORDS..(gi + 1) * LANE_WORDS];
                for (a, w) in dst.iter_mut().zip(t.iter()) {
                    *a ^= *w;
                }
            }
        }
    }
}
