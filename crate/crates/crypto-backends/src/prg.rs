//! Seed-expanding PRG built on a SHAKE256 XOF.
//!
//! Queries and precomputation masks expand small seeds into long bit vectors.
//! The `AllZero` variant exists so protocol tests can observe the degenerate
//! no-mask behaviour; it is never selected by production paths.

use sha3::digest::{ExtendableOutput, Update, XofReader};
use sha3::Shake256;

/// Pseudo-random generator selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prg {
    /// SHAKE256 over (domain ∥ seed), read out to the requested length.
    Shake256,
    /// Expands to all-zero bytes. Test-only degenerate mask.
    AllZero,
}

impl Prg {
    pub fn expand_into(&self, domain: &str, seed: &[u8], out: &mut [u8]) {
        match self {
            Prg::Shake256 => {
                let mut x = Shake256::default();
                x.update(&(domain.len() as u64).to_le_bytes());
                x.update(domain.as_bytes());
                x.update(&(seed.len() as u64).to_le_bytes());
                x.update(seed);
                x.finalize_xof().read(out);
            }
            Prg::AllZero => out.fill(0),
        }
    }
}

/// Expand `seed` to `len` bytes under the default SHAKE256 PRG.
pub fn xof_expand(domain: &str, seed: &[u8], len: usize) -> Vec<u8> {
    let mut out = vec![0u8; len];
    Prg::Shake256.expand_into(domain, seed, &mut out);
    out
}

/// Expand to exactly `nbits` bits; unused high bits of the last byte are zero.
pub fn xof_bits(prg: Prg, domain: &str, seed: &[u8], nbits: usize) -> Vec<u8> {
    let nbytes = nbits.div_ceil(8);
    let mut out = vec![0u8; nbytes];
    prg.expand_into(domain, seed, &mut out);
    let tail = nbits % 8;
    if tail != 0 {
        out[nbytes - 1] &= (1u8 << tail) - 1;
    }
    out
}
