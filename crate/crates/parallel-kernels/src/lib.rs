//! Batched server-side kernels for multi-query PIR answering.
//!
//! The two hot operations a spectrum database performs are a GF(2)
//! query-matrix × bit-matrix product (XOR row folding) and an exact modular
//! query-matrix × word-matrix product. Both are provided in two forms:
//!
//! * a plain scalar reference, one query at a time, used as the correctness
//!   oracle and as the baseline for speedup reporting;
//! * a data-parallel kernel that partitions work into (query, column-lane)
//!   tiles with 8-way strided row accumulation and a per-tile reduction,
//!   fanned out over a caller-sized worker pool.
//!
//! Outputs of both paths are bit-exact identical: XOR and modular addition
//! are associative and commutative, and the accumulation order within a tile
//! is fixed, so results do not depend on worker count or scheduling.

mod bitmat;
mod fieldmat;
mod gf2;
mod modfield;
mod pool;

pub use bitmat::BitMatrix;
pub use fieldmat::FieldMatrix;
pub use gf2::{batch_matvec_gf2, scalar_matvec_gf2, BatchGf2Job, RowFetchPolicy};
pub use modfield::{batch_matmul_field, scalar_matmul_field, BatchFieldJob, Tiling};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KernelError {
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error("modulus {0} too large for lazy 64-bit accumulation (max 2^17)")]
    ModulusTooLarge(u64),
}

/// Which execution path serves a job.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelBackend {
    /// Per-query scalar loop (the reference path).
    Scalar,
    /// Tiled data-parallel path on `workers` threads.
    DataParallel { workers: usize },
}

/// Select a kernel backend handle. `workers` is clamped to at least 1.
pub fn backend_select(kind: KernelBackend) -> KernelBackend {
    match kind {
        KernelBackend::DataParallel { workers } => KernelBackend::DataParallel {
            workers: workers.max(1),
        },
        s => s,
    }
}

impl KernelBackend {
    pub fn matvec_gf2(&self, job: &BatchGf2Job) -> Result<BitMatrix, KernelError> {
        match self {
            KernelBackend::Scalar => {
                job.check()?;
                let mut out = BitMatrix::zero(job.queries.rows(), job.db.cols());
                for q in 0..job.queries.rows() {
                    let folded = scalar_matvec_gf2(job.queries.row_words(q), job.db);
                    out.row_words_mut(q).copy_from_slice(&folded);
                }
                Ok(out)
            }
            KernelBackend::DataParallel { workers } => batch_matvec_gf2(job, *workers),
        }
    }

    pub fn matmul_field(&self, job: &BatchFieldJob) -> Result<FieldMatrix, KernelError> {
        match self {
            KernelBackend::Scalar => scalar_matmul_field(job),
            KernelBackend::DataParallel { workers } => batch_matmul_field(job, *workers),
        }
    }
}
