//! Pluggable cryptographic backends for the private spectrum-access stack.
//!
//! Every primitive here is driven by explicit seeds or entropy bytes supplied
//! by the caller, never by ambient randomness. That keeps simulations
//! reproducible: the same seed always yields the same keys, ciphertexts and
//! signatures regardless of which component asks first.
//!
//! Two backend families are provided for the asymmetric primitives:
//! the module-lattice NIST standards (ML-DSA-44 signatures, ML-KEM-768
//! encapsulation) for realistic sizes and costs, and deterministic insecure
//! stubs for fast protocol-level tests. Protocol code selects a backend by
//! value; nothing in the stack hardcodes one.

pub mod aead;
pub mod hash;
pub mod kem;
pub mod prg;
pub mod sig;

pub use aead::Aead256;
pub use hash::{sha256, sha256_tagged};
pub use kem::{KemBackend, KemError, KemKeypair};
pub use prg::{xof_bits, xof_expand, Prg};
pub use sig::{SigBackend, SigError, SigKeypair};
