//! SHA-256 with length-framed, domain-separated input encoding.

use sha2::{Digest, Sha256};

/// Hash a sequence of byte strings with unambiguous length framing.
pub fn sha256(parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().into()
}

/// Domain-separated variant: the tag is hashed first, so digests from
/// different protocol roles never collide even on identical payloads.
pub fn sha256_tagged(domain: &str, parts: &[&[u8]]) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update((domain.len() as u64).to_le_bytes());
    h.update(domain.as_bytes());
    for p in parts {
        h.update((p.len() as u64).to_le_bytes());
        h.update(p);
    }
    h.finalize().into()
}
