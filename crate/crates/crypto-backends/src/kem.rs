//! Key encapsulation backend: ML-KEM-768 plus a deterministic test stub.
//!
//! Encapsulation takes explicit 32-byte entropy so circuit builds replay
//! bit-exactly under a fixed seed.

use ml_kem::kem::{Decapsulate, KeyExport};
use ml_kem::{B32, DecapsulationKey, EncapsulationKey, MlKem768, Seed};
use thiserror::Error;

use crate::hash::sha256_tagged;
use crate::prg::xof_expand;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KemError {
    #[error("malformed encapsulation key")]
    BadKey,
    #[error("malformed ciphertext")]
    BadCiphertext,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KemBackend {
    /// FIPS 203 module-lattice KEM (1184-byte public keys, 1088-byte ciphertexts).
    MlKem768,
    /// Deterministic stub: ciphertext is the entropy masked under a public
    /// stream, so anyone holding the public key can recover it. Test-only.
    InsecureStub,
}

/// Decapsulation-side state, derived from a 64-byte seed.
#[derive(Clone)]
pub struct KemKeypair {
    backend: KemBackend,
    seed: [u8; 64],
    public: Vec<u8>,
}

impl KemKeypair {
    pub fn from_seed(backend: KemBackend, seed: [u8; 64]) -> Self {
        let public = match backend {
            KemBackend::MlKem768 => {
                let dk = DecapsulationKey::<MlKem768>::from_seed(Seed::from(seed));
                dk.encapsulation_key().to_bytes().to_vec()
            }
            KemBackend::InsecureStub => sha256_tagged("stub-kem-pk", &[&seed]).to_vec(),
        };
        KemKeypair { backend, seed, public }
    }

    pub fn backend(&self) -> KemBackend {
        self.backend
    }

    pub fn public_key(&self) -> &[u8] {
        &self.public
    }

    pub fn decapsulate(&self, ct: &[u8]) -> Result<[u8; 32], KemError> {
        match self.backend {
            KemBackend::MlKem768 => {
                let dk = DecapsulationKey::<MlKem768>::from_seed(Seed::from(self.seed));
                let ct = ml_kem::Ciphertext::<MlKem768>::try_from(ct)
                    .map_err(|_| KemError::BadCiphertext)?;
                Ok(dk.decapsulate(&ct).into())
            }
            KemBackend::InsecureStub => stub_open(&self.public, ct),
        }
    }
}

/// Encapsulate to `public`, deriving all randomness from `entropy`.
/// Returns (ciphertext, 32-byte shared secret).
pub fn encapsulate(
    backend: KemBackend,
    public: &[u8],
    entropy: [u8; 32],
) -> Result<(Vec<u8>, [u8; 32]), KemError> {
    match backend {
        KemBackend::MlKem768 => {
            let ek_bytes =
                ml_kem::Key::<EncapsulationKey<MlKem768>>::try_from(public).map_err(|_| KemError::BadKey)?;
            let ek = EncapsulationKey::<MlKem768>::new(&ek_bytes).map_err(|_| KemError::BadKey)?;
            let (ct, shared) = ek.encapsulate_deterministic(&B32::from(entropy));
            Ok((ct.to_vec(), shared.into()))
        }
        KemBackend::InsecureStub => {
            let mask = xof_expand("stub-kem-mask", public, 32);
            let ct: Vec<u8> = entropy.iter().zip(&mask).map(|(a, b)| a ^ b).collect();
            let shared = sha256_tagged("stub-kem-shared", &[public, &entropy]);
            Ok((ct, shared))
        }
    }
}

fn stub_open(public: &[u8], ct: &[u8]) -> Result<[u8; 32], KemError> {
    if ct.len() != 32 {
        return Err(KemError::BadCiphertext);
    }
    let mask = xof_expand("stub-kem-mask", public, 32);
    let mut entropy = [0u8; 32];
    for (i, (a, b)) in ct.iter().zip(&mask).enumerate() {
        entropy[i] = a ^ b;
    }
    Ok(sha256_tagged("stub-kem-shared", &[public, &entropy]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ml_kem_roundtrip() {
        let kp = KemKeypair::from_seed(KemBackend::MlKem768, [3u8; 64]);
        let (ct, k1) = encapsulate(KemBackend::MlKem768, kp.public_key(), [9u8; 32]).unwrap();
        let k2 = kp.decapsulate(&ct).unwrap();
        assert_eq!(k1, k2);
        assert_eq!(ct.len(), 1088);
    }

    #[test]
    fn stub_roundtrip_deterministic() {
        let kp = KemKeypair::from_seed(KemBackend::InsecureStub, [5u8; 64]);
        let (ct_a, k_a) = encapsulate(KemBackend::InsecureStub, kp.public_key(), [1u8; 32]).unwrap();
        let (ct_b, k_b) = encapsulate(KemBackend::InsecureStub, kp.public_key(), [1u8; 32]).unwrap();
        assert_eq!(ct_a, ct_b);
        assert_eq!(k_a, k_b);
        assert_eq!(kp.decapsulate(&ct_a).unwrap(), k_a);
    }
}
