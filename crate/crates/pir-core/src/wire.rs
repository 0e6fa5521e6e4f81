//! Wire encoding of queries and responses.
//!
//! Frame: scheme-id u8 ∥ server-id u8 ∥ length u32 ∥ raw payload, all
//! little-endian. Field elements travel as u32 LE each.

use spectrum_db::SchemeId;

use crate::PirError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireFrame {
    pub scheme: SchemeId,
    pub server_id: u8,
    pub payload: Vec<u8>,
}

impl WireFrame {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(6 + self.payload.len());
        out.push(self.scheme as u8);
        out.push(self.server_id);
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<WireFrame, PirError> {
        if bytes.len() < 6 {
            return Err(PirError::Wire("frame shorter than header".into()));
        }
        let scheme = SchemeId::from_tag(bytes[0])
            .ok_or_else(|| PirError::Wire(format!("unknown scheme id {}", bytes[0])))?;
        let server_id = bytes[1];
        let len = u32::from_le_bytes(bytes[2..6].try_into().unwrap()) as usize;
        if bytes.len() != 6 + len {
            return Err(PirError::Wire(format!(
                "frame length {} != header-declared {}",
                bytes.len(),
                6 + len
            )));
        }
        Ok(WireFrame { scheme, server_id, payload: bytes[6..].to_vec() })
    }
}

pub fn words_to_bytes(words: &[u32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(words.len() * 4);
    for w in words {
        out.extend_from_slice(&w.to_le_bytes());
    }
    out
}

pub fn bytes_to_words(bytes: &[u8]) -> Result<Vec<u32>, PirError> {
    if bytes.len() % 4 != 0 {
        return Err(PirError::Wire("field payload not a multiple of 4 bytes".into()));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_roundtrip() {
        let f = WireFrame { scheme: SchemeId::Ftr, server_id: 3, payload: vec![1, 2, 3] };
        assert_eq!(WireFrame::decode(&f.encode()).unwrap(), f);
    }

    #[test]
    fn truncated_frame_rejected() {
        let f = WireFrame { scheme: SchemeId::Ens, server_id: 0, payload: vec![9; 10] };
        let mut bytes = f.encode();
        bytes.pop();
        assert!(WireFrame::decode(&bytes).is_err());
    }

    #[test]
    fn word_roundtrip() {
        let w = vec![0u32, 1, 65536, u32::MAX];
        assert_eq!(bytes_to_words(&words_to_bytes(&w)).unwrap(), w);
    }
}
