//! Fixed 560-byte spectrum record serialization.

use crate::grid::GridCoordinate;
use crate::DbError;

/// Serialized record size inside a block.
pub const RECORD_BYTES: usize = 560;

const HEADER: usize = 4 + 4 + 4 + 4 + 4 + 1 + 2;
/// Free-form spectrum payload capacity after the fixed header.
pub const AUX_CAPACITY: usize = RECORD_BYTES - HEADER;

/// One spectrum availability entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpectrumRecord {
    pub coord: GridCoordinate,
    pub channel: u32,
    pub time_window: u32,
    /// Max transmission power, fixed-point centi-dBm.
    pub eirp_centi_dbm: i32,
    pub available: bool,
    /// Device-attribute and access-preference payload, up to
    /// [`AUX_CAPACITY`] bytes; the remainder of the record is zero padding.
    pub aux: Vec<u8>,
}

impl SpectrumRecord {
    pub fn encode(&self) -> Result<[u8; RECORD_BYTES], DbError> {
        if self.aux.len() > AUX_CAPACITY {
            return Err(DbError::Block(format!(
                "record payload {} exceeds capacity {AUX_CAPACITY}",
                self.aux.len()
            )));
        }
        let mut out = [0u8; RECORD_BYTES];
        out[0..4].copy_from_slice(&self.coord.cell_x.to_le_bytes());
        out[4..8].copy_from_slice(&self.coord.cell_y.to_le_bytes());
        out[8..12].copy_from_slice(&self.channel.to_le_bytes());
        out[12..16].copy_from_slice(&self.time_window.to_le_bytes());
        out[16..20].copy_from_slice(&self.eirp_centi_dbm.to_le_bytes());
        out[20] = self.available as u8;
        out[21..23].copy_from_slice(&(self.aux.len() as u16).to_le_bytes());
        out[HEADER..HEADER + self.aux.len()].copy_from_slice(&self.aux);
        Ok(out)
    }

    pub fn decode(bytes: &[u8]) -> Result<SpectrumRecord, DbError> {
        if bytes.len() < RECORD_BYTES {
            return Err(DbError::Block("record shorter than 560 bytes".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
        let aux_len = u16::from_le_bytes(bytes[21..23].try_into().unwrap()) as usize;
        if aux_len > AUX_CAPACITY {
            return Err(DbError::Block("record payload length out of range".into()));
        }
        Ok(SpectrumRecord {
            coord: GridCoordinate { cell_x: u32_at(0), cell_y: u32_at(4) },
            channel: u32_at(8),
            time_window: u32_at(12),
            eirp_centi_dbm: i32::from_le_bytes(bytes[16..20].try_into().unwrap()),
            available: bytes[20] != 0,
            aux: bytes[HEADER..HEADER + aux_len].to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode_roundtrip() {
        let r = SpectrumRecord {
            coord: GridCoordinate { cell_x: 7, cell_y: 3 },
            channel: 11,
            time_window: 2,
            eirp_centi_dbm: -1250,
            available: true,
            aux: vec![1, 2, 3, 9],
        };
        let bytes = r.encode().unwrap();
        assert_eq!(bytes.len(), RECORD_BYTES);
        assert_eq!(SpectrumRecord::decode(&bytes).unwrap(), r);
    }

    #[test]
    fn oversized_payload_rejected() {
        let r = SpectrumRecord {
            coord: GridCoordinate { cell_x: 0, cell_y: 0 },
            channel: 0,
            time_window: 0,
            eirp_centi_dbm: 0,
            available: false,
            aux: vec![0; AUX_CAPACITY + 1],
        };
        assert!(r.encode().is_err());
    }
}
