//! Exact batched modular matrix product for word-coded databases.
//!
//! The data-parallel path computes bm × bn output tiles with 8×8 register
//! micro-blocks, walking the shared depth dimension in steps of `br` with
//! 64-bit local accumulators and a lazy reduction per step. The tile shape
//! adapts to the batch size the same way the GPU launch dimensions do.

use std::sync::atomic::{AtomicU32, Ordering};

use crate::fieldmat::FieldMatrix;
use crate::pool::run_tiles;
use crate::KernelError;

/// Largest modulus for which `br` products fit a 64-bit accumulator.
pub const MAX_MODULUS: u64 = 1 << 17;

/// Block and register tile sizes for the field kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Tiling {
    pub bm: usize,
    pub bn: usize,
    pub br: usize,
    pub tm: usize,
    pub tn: usize,
}

impl Tiling {
    /// Default shape for a q̄ × b product: br = tm = tn = 8, block size 128
    /// when both output dimensions reach 128, 64 otherwise.
    pub fn for_dims(batch: usize, cols: usize) -> Self {
        let (bm, bn) = if batch >= 128 && cols >= 128 { (128, 128) } else { (64, 64) };
        Tiling { bm, bn, br: 8, tm: 8, tn: 8 }
    }
}

/// A batch of field-vector queries against one word-matrix database.
pub struct BatchFieldJob<'a> {
    /// q̄ × r query coefficients.
    pub queries: &'a FieldMatrix,
    /// r × b database words.
    pub db: &'a FieldMatrix,
    pub tiling: Tiling,
}

impl<'a> BatchFieldJob<'a> {
    pub fn new(queries: &'a FieldMatrix, db: &'a FieldMatrix) -> Self {
        let tiling = Tiling::for_dims(queries.rows(), db.cols());
        BatchFieldJob { queries, db, tiling }
    }

    fn check(&self) -> Result<(), KernelError> {
        if self.queries.cols() != self.db.rows() {
            return Err(KernelError::Geometry(format!(
                "query length {} != database rows {}",
                self.queries.cols(),
                self.db.rows()
            )));
        }
        if self.queries.modulus() != self.db.modulus() {
            return Err(KernelError::Geometry(format!(
                "modulus mismatch {} != {}",
                self.queries.modulus(),
                self.db.modulus()
            )));
        }
        if self.db.modulus() > MAX_MODULUS {
            return Err(KernelError::ModulusTooLarge(self.db.modulus()));
        }
        Ok(())
    }
}

/// Reference path: one query row at a time, no tiling, no threads. Uses the
/// same depth-chunked lazy reduction so results are exact mod p.
pub fn scalar_matmul_field(job: &BatchFieldJob) -> Result<FieldMatrix, KernelError> {
    job.check()?;
    let p = job.db.modulus();
    let r = job.db.rows();
    let cols = job.db.cols();
    let br = job.tiling.br.max(1);
    let mut out = FieldMatrix::zero(job.queries.rows(), cols, p);
    for qi in 0..job.queries.rows() {
        let qrow = job.queries.row(qi);
        let orow = out.row_mut(qi);
        for k0 in (0..r).step_by(br) {
            let kend = (k0 + br).min(r);
            for k in k0..kend {
                let c = qrow[k] as u64;
                if c == 0 {
                    continue;
                }
                let drow = job.db.row(k);
                for (o, d) in orow.iter_mut().zip(drow) {
                    let s = *o as u64 + c * (*d as u64);
                    *o = (s % p) as u32;
                }
            }
        }
    }
    Ok(out)
}

/// Tiled data-parallel product; bit-exact equal to the scalar reference.
pub fn batch_matmul_field(job: &BatchFieldJob, workers: usize) -> Result<FieldMatrix, KernelError> {
    job.check()?;
    let p = job.db.modulus();
    let q_total = job.queries.rows();
    let r = job.db.rows();
    let cols = job.db.cols();
    let t = job.tiling;
    if q_total == 0 || cols == 0 {
        return Ok(FieldMatrix::zero(q_total, cols, p));
    }

    let tiles_m = q_total.div_ceil(t.bm);
    let tiles_n = cols.div_ceil(t.bn);
    let out_cells: Vec<AtomicU32> = (0..q_total * cols).map(|_| AtomicU32::new(0)).collect();

    run_tiles(tiles_m * tiles_n, workers, |tile| {
        let ti = tile / tiles_n;
        let tj = tile % tiles_n;
        let i0 = ti * t.bm;
        let i1 = (i0 + t.bm).min(q_total);
        let j0 = tj * t.bn;
        let j1 = (j0 + t.bn).min(cols);

        let mut acc = vec![0u64; t.tm * t.tn];
        for mi in (i0..i1).step_by(t.tm) {
            let mi1 = (mi + t.tm).min(i1);
            for mj in (j0..j1).step_by(t.tn) {
                let mj1 = (mj + t.tn).min(j1);
                acc.fill(0);
                for k0 in (0..r).step_by(t.br) {
                    let kend = (k0 + t.br).min(r);
                    for (ai, i) in (mi..mi1).enumerate() {
                        let qrow = job.queries.row(i);
                        for (aj, j) in (mj..mj1).enumerate() {
                            let mut s = 0u64;
                            for k in k0..kend {
                                s += qrow[k] as u64 * job.db.get(k, j) as u64;
                            }
                            let cell = &mut acc[ai * t.tn + aj];
                            *cell = (*cell + s) % p;
                        }
                    }
                }
                for (ai, i) in (mi..mi1).enumerate() {
                    for (aj, j) in (mj..mj1).enumerate() {
                        out_cells[i * cols + j].store(acc[ai * t.tn + aj] as u32, Ordering::Relaxed);
                    }
                }
            }
        }
    });

    let data: Vec<u32> = out_cells.into_iter().map(|c| c.into_inner()).collect();
    Ok(FieldMatrix::from_data(q_total, cols, p, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_db(rows: usize, cols: usize, p: u64) -> FieldMatrix {
        let mut db = FieldMatrix::zero(rows, cols, p);
        for r in 0..rows {
            for c in 0..cols {
                db.set(r, c, ((r * 31 + c * 17 + 5) as u64 % p) as u32);
            }
        }
        db
    }

    #[test]
    fn identity_block_returns_rows() {
        let p = 65537;
        let db = small_db(6, 9, p);
        let mut q = FieldMatrix::zero(6, 6, p);
        for i in 0..6 {
            q.set(i, i, 1);
        }
        let out = batch_matmul_field(&BatchFieldJob::new(&q, &db), 2).unwrap();
        for i in 0..6 {
            assert_eq!(out.row(i), db.row(i));
        }
    }

    #[test]
    fn matches_scalar_on_odd_dims() {
        let p = 97;
        let db = small_db(23, 17, p);
        let mut q = FieldMatrix::zero(5, 23, p);
        for i in 0..5 {
            for k in 0..23 {
                q.set(i, k, ((i * 13 + k * 7 + 1) % 97) as u32);
            }
        }
        let job = BatchFieldJob::new(&q, &db);
        let a = scalar_matmul_field(&job).unwrap();
        let b = batch_matmul_field(&job, 3).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oversized_modulus_rejected() {
        let p = (1 << 17) + 1;
        let db = FieldMatrix::zero(2, 2, p);
        let q = FieldMatrix::zero(1, 2, p);
        assert!(matches!(
            batch_matmul_field(&BatchFieldJob::new(&q, &db), 1),
            Err(KernelError::ModulusTooLarge(_))
        ));
    }
}
