//! 256-bit-key authenticated encryption (AES-256-GCM) with caller-built nonces.

use aes_gcm::aead::{Aead, Payload};
use aes_gcm::{Aes256Gcm, Key, KeyInit, Nonce};

/// AES-256-GCM under a fixed 32-byte key. Nonces are composed by the caller
/// from (hop, direction, counter) so a key is never reused with one nonce.
#[derive(Clone)]
pub struct Aead256 {
    cipher: Aes256Gcm,
}

/// GCM tag length appended to every ciphertext.
pub const AEAD_TAG_LEN: usize = 16;

impl Aead256 {
    pub fn new(key: &[u8; 32]) -> Self {
        Aead256 {
            cipher: Aes256Gcm::new(Key::<Aes256Gcm>::from_slice(key)),
        }
    }

    /// Build a 12-byte nonce from a direction flag, hop index and counter.
    pub fn nonce(direction: u8, hop: u8, counter: u64) -> [u8; 12] {
        let mut n = [0u8; 12];
        n[0] = direction;
        n[1] = hop;
        n[4..12].copy_from_slice(&counter.to_le_bytes());
        n
    }

    pub fn seal(&self, nonce: &[u8; 12], aad: &[u8], plaintext: &[u8]) -> Vec<u8> {
        self.cipher
            .encrypt(Nonce::from_slice(nonce), Payload { msg: plaintext, aad })
            .expect("AES-GCM encryption is infallible for in-memory buffers")
    }

    /// Returns `None` on authentication failure.
    pub fn open(&self, nonce: &[u8; 12], aad: &[u8], ciphertext: &[u8]) -> Option<Vec<u8>> {
        self.cipher
            .decrypt(Nonce::from_slice(nonce), Payload { msg: ciphertext, aad })
            .ok()
    }
}
