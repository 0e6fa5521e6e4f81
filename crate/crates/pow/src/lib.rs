//! Client-puzzle proof-of-work schemes for DoS-resistant service admission.
//!
//! Two constructions with different hardness bases:
//!
//! * [`hct`] — hashcash trees: a perfect binary tree of hashcash puzzles
//!   solved child-before-parent, verified along a single random root path in
//!   logarithmically many hashes. Difficulty is the leading-zero-bit count κ.
//! * [`lbp`] — lattice puzzles: find a nonzero vector of a random
//!   determinant-p lattice within a Hermite-style norm bound. Generation is
//!   O(n) modular arithmetic; solving requires basis reduction and
//!   enumeration.
//!
//! Both expose generate / solve / verify plus a byte serialization used when
//! puzzles are embedded into spectrum database blocks.

pub mod hct;
pub mod lbp;
mod lll;
mod primes;

use rand::RngCore;
use thiserror::Error;

pub use hct::{CountingHasher, HctPuzzle, HctSolution, PathProof, Sha256Hasher};
pub use lbp::{LbpPuzzle, LbpSolution};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PowError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("malformed puzzle or solution encoding: {0}")]
    Encoding(String),
    #[error("verification rejected: {0}")]
    Rejected(String),
    #[error("solver exhausted its effort budget")]
    SolverExhausted,
}

/// Puzzle family selector, also used as the wire tag in database blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PowKind {
    Hct,
    Lbp,
}

impl PowKind {
    pub fn tag(self) -> u8 {
        match self {
            PowKind::Hct => 1,
            PowKind::Lbp => 2,
        }
    }

    pub fn from_tag(t: u8) -> Option<Self> {
        match t {
            1 => Some(PowKind::Hct),
            2 => Some(PowKind::Lbp),
            _ => None,
        }
    }
}

/// A puzzle of either family.
#[derive(Debug, Clone, PartialEq)]
pub enum Puzzle {
    Hct(HctPuzzle),
    Lbp(LbpPuzzle),
}

/// A solution of either family. The HCT variant carries the full nonce tree
/// so any challenged path can be served.
#[derive(Debug, Clone, PartialEq)]
pub enum Solution {
    Hct(HctSolution),
    Lbp(LbpSolution),
}

impl Puzzle {
    pub fn kind(&self) -> PowKind {
        match self {
            Puzzle::Hct(_) => PowKind::Hct,
            Puzzle::Lbp(_) => PowKind::Lbp,
        }
    }

    pub fn kappa(&self) -> u32 {
        match self {
            Puzzle::Hct(p) => p.kappa,
            Puzzle::Lbp(p) => lbp::kappa_for_dim(p.n_dim),
        }
    }

    /// Generate a puzzle at difficulty κ. For the lattice family the
    /// dimension follows the solver-cost exponent (κ ≈ 0.2925·n classical
    /// trials), floored at dimension 10.
    pub fn generate(kind: PowKind, kappa: u32, rng: &mut dyn RngCore) -> Result<Puzzle, PowError> {
        match kind {
            PowKind::Hct => Ok(Puzzle::Hct(hct::hct_gen(kappa, hct::DEFAULT_LEAVES, rng)?)),
            PowKind::Lbp => {
                let n = lbp::dim_for_kappa(kappa);
                Ok(Puzzle::Lbp(lbp::lbp_gen(n, rng)?))
            }
        }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Puzzle::Hct(p) => p.to_bytes().to_vec(),
            Puzzle::Lbp(p) => p.to_bytes(),
        }
    }

    pub fn from_bytes(kind: PowKind, bytes: &[u8]) -> Result<Puzzle, PowError> {
        match kind {
            PowKind::Hct => Ok(Puzzle::Hct(HctPuzzle::from_bytes(bytes)?)),
            PowKind::Lbp => Ok(Puzzle::Lbp(LbpPuzzle::from_bytes(bytes)?)),
        }
    }

    /// Solve with default effort. HCT uses the deterministic counter search.
    pub fn solve(&self) -> Result<Solution, PowError> {
        match self {
            Puzzle::Hct(p) => Ok(Solution::Hct(hct::hct_solve(p, &Sha256Hasher).0)),
            Puzzle::Lbp(p) => Ok(Solution::Lbp(lbp::lbp_solve(p, lbp::SolveEffort::default())?)),
        }
    }

    /// Non-interactive verification: HCT derives the challenged leaf from
    /// (root nonce ∥ context); the lattice check is already non-interactive.
    pub fn verify(&self, solution: &Solution, context: &[u8]) -> Result<(), PowError> {
        match (self, solution) {
            (Puzzle::Hct(p), Solution::Hct(s)) => {
                if s.nonces.len() != p.node_count() + 1 {
                    return Err(PowError::Rejected("solution does not cover the tree".into()));
                }
                hct::hct_verify_noninteractive(p, &s.noninteractive_proof(p, context), context, &Sha256Hasher)
            }
            (Puzzle::Lbp(p), Solution::Lbp(s)) => lbp::lbp_verify(p, s),
            _ => Err(PowError::Rejected("puzzle/solution kind mismatch".into())),
        }
    }
}

impl Solution {
    pub fn to_bytes(&self) -> Vec<u8> {
        match self {
            Solution::Hct(s) => s.to_bytes(),
            Solution::Lbp(s) => s.to_bytes(),
        }
    }

    pub fn from_bytes(kind: PowKind, bytes: &[u8]) -> Result<Solution, PowError> {
        match kind {
            PowKind::Hct => Ok(Solution::Hct(HctSolution::from_bytes(bytes)?)),
            PowKind::Lbp => Ok(Solution::Lbp(LbpSolution::from_bytes(bytes)?)),
        }
    }
}
