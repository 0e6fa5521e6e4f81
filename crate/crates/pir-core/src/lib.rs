//! Multi-server private block retrieval over replicated spectrum databases.
//!
//! Three schemes with different trust and cost profiles:
//!
//! * [`ens`] — XOR shares across ℓ non-colluding responsive servers. The
//!   cheapest scheme; any ℓ−1 servers together learn nothing, but all ℓ must
//!   answer.
//! * [`ftr`] — Shamir-coded queries: per-row random degree-t polynomials
//!   whose constant term encodes the selector. Any k > t responses
//!   reconstruct by interpolation, and up to ⌊(k−t−1)/2⌋ corrupted answers
//!   are corrected by unique decoding.
//! * [`oop`] — seed-masked chunk queries with server-side offline
//!   precomputation: servers expand a short seed into a mask over their
//!   non-flip chunks ahead of time, so the online pass touches only 1/n of
//!   the database and queries shrink to one chunk plus a seed.
//!
//! All three respond paths fold over the same immutable [`spectrum_db::DbMatrix`]
//! and batch through the data-parallel kernels when several queries queue up.

pub mod ens;
pub mod ftr;
pub mod oop;
pub mod wire;

mod field;

pub use field::PrimeField;

use thiserror::Error;

/// Default prime modulus for the Shamir-coded scheme.
pub const DEFAULT_FTR_MODULUS: u64 = 65537;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PirError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error("incomplete responses: have {have}, need {need}")]
    Incomplete { have: usize, need: usize },
    #[error("robust decoding failed{}", suspected_list(.suspected))]
    Robustness { suspected: Vec<u8> },
    #[error("offline queue empty; retry after refill")]
    Backpressure,
    #[error("precomputed pair already consumed")]
    SessionReplay,
    #[error("kernel error: {0}")]
    Kernel(String),
    #[error("wire format: {0}")]
    Wire(String),
}

fn suspected_list(s: &[u8]) -> String {
    if s.is_empty() {
        String::new()
    } else {
        format!(" (suspected servers: {s:?})")
    }
}

impl From<parallel_kernels::KernelError> for PirError {
    fn from(e: parallel_kernels::KernelError) -> Self {
        PirError::Kernel(e.to_string())
    }
}
