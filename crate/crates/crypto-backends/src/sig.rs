//! Post-quantum signature backend: ML-DSA-44 plus a deterministic test stub.

use ml_dsa::signature::{Keypair, Signer, Verifier};
use ml_dsa::{MlDsa44, Seed, SigningKey, VerifyingKey};
use thiserror::Error;

use crate::hash::sha256_tagged;

/// ML-DSA-44 signature length in bytes.
pub const ML_DSA_44_SIG_LEN: usize = 2420;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SigError {
    #[error("malformed key material")]
    BadKey,
    #[error("signature rejected")]
    Rejected,
}

/// Which signature scheme backs a keypair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigBackend {
    /// FIPS 204 module-lattice signatures (2420-byte signatures).
    MlDsa44,
    /// Deterministic stub for fast tests. The signature embeds the secret
    /// seed, so it is trivially forgeable once observed — never use it
    /// outside a simulation.
    InsecureStub,
}

/// A signing/verification keypair derived from a 32-byte seed.
#[derive(Clone)]
pub struct SigKeypair {
    backend: SigBackend,
    seed: [u8; 32],
    public: Vec<u8>,
}

impl SigKeypair {
    pub fn from_seed(backend: SigBackend, seed: [u8; 32]) -> Self {
        let public = match backend {
            SigBackend::MlDsa44 => {
                let sk = SigningKey::<MlDsa44>::from_seed(&Seed::from(seed));
                sk.verifying_key().encode().to_vec()
            }
            SigBackend::InsecureStub => sha256_tagged("stub-sig-pk", &[&seed]).to_vec(),
        };
        SigKeypair { backend, seed, public }
    }

    pub fn backend(&self) -> SigBackend {
        self.backend
    }

    /// Public verification key bytes (1312 bytes for ML-DSA-44).
    pub fn public_key(&self) -> &[u8] {
        &self.public
    }

    pub fn sign(&self, msg: &[u8]) -> Vec<u8> {
        match self.backend {
            SigBackend::MlDsa44 => {
                let sk = SigningKey::<MlDsa44>::from_seed(&Seed::from(self.seed));
                sk.sign(msg).encode().to_vec()
            }
            SigBackend::InsecureStub => {
                let mac = sha256_tagged("stub-sig", &[&self.seed, msg]);
                let mut sig = vec![0u8; ML_DSA_44_SIG_LEN];
                sig[..32].copy_from_slice(&self.seed);
                sig[32..64].copy_from_slice(&mac);
                sig
            }
        }
    }
}

/// Verify `sig` over `msg` under `public` for the given backend.
pub fn verify(backend: SigBackend, public: &[u8], msg: &[u8], sig: &[u8]) -> Result<(), SigError> {
    match backend {
        SigBackend::MlDsa44 => {
            let enc = ml_dsa::EncodedVerifyingKey::<MlDsa44>::try_from(public)
                .map_err(|_| SigError::BadKey)?;
            let vk = VerifyingKey::<MlDsa44>::decode(&enc);
            let enc_sig = ml_dsa::EncodedSignature::<MlDsa44>::try_from(sig)
                .map_err(|_| SigError::Rejected)?;
            let sig = ml_dsa::Signature::<MlDsa44>::decode(&enc_sig).ok_or(SigError::Rejected)?;
            vk.verify(msg, &sig).map_err(|_| SigError::Rejected)
        }
        SigBackend::InsecureStub => {
            if sig.len() != ML_DSA_44_SIG_LEN {
                return Err(SigError::Rejected);
            }
            let seed: [u8; 32] = sig[..32].try_into().unwrap();
            let mac: [u8; 32] = sig[32..64].try_into().unwrap();
            if sha256_tagged("stub-sig-pk", &[&seed])[..] != public[..] {
                return Err(SigError::Rejected);
            }
            if sha256_tagged("stub-sig", &[&seed, msg]) != mac {
                return Err(SigError::Rejected);
            }
            if sig[64..].iter().any(|&b| b != 0) {
                return Err(SigError::Rejected);
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ml_dsa_roundtrip_and_size() {
        let kp = SigKeypair::from_seed(SigBackend::MlDsa44, [7u8; 32]);
        let sig = kp.sign(b"spectrum");
        assert_eq!(sig.len(), ML_DSA_44_SIG_LEN);
        verify(SigBackend::MlDsa44, kp.public_key(), b"spectrum", &sig).unwrap();
        assert_eq!(
            verify(SigBackend::MlDsa44, kp.public_key(), b"tampered", &sig),
            Err(SigError::Rejected)
        );
    }

    #[test]
    fn stub_rejects_wrong_key() {
        let a = SigKeypair::from_seed(SigBackend::InsecureStub, [1u8; 32]);
        let b = SigKeypair::from_seed(SigBackend::InsecureStub, [2u8; 32]);
        let sig = a.sign(b"m");
        verify(SigBackend::InsecureStub, a.public_key(), b"m", &sig).unwrap();
        assert_eq!(
            verify(SigBackend::InsecureStub, b.public_key(), b"m", &sig),
            Err(SigError::Rejected)
        );
    }
}
