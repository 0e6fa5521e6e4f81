//! Delta compression of sorted record sets.
//!
//! Records sorted by index differ little between neighbours, so the stream
//! stores per-field differences: a varint index gap (cell/channel/window are
//! recovered from the index), a zigzag EIRP delta, the availability bit, and
//! the payload XORed against the previous record's payload, run-length
//! coded. Decompression is exact for any sorted input.

use crate::grid::db_unindex;
use crate::record::SpectrumRecord;
use crate::{db_index, DbError, IndexDims};

pub fn compress_rows(records: &[SpectrumRecord], dims: &IndexDims) -> Result<Vec<u8>, DbError> {
    let mut out = Vec::new();
    write_varint(&mut out, records.len() as u64);
    let mut prev_theta: Option<u64> = None;
    let mut prev_eirp = 0i32;
    let mut prev_aux: &[u8] = &[];
    for (position, r) in records.iter().enumerate() {
        let theta = db_index(r.coord, r.channel, r.time_window, dims)? as u64;
        let gap = match prev_theta {
            None => theta,
            Some(p) if theta > p => theta - p,
            Some(_) => return Err(DbError::Ordering { position }),
        };
        write_varint(&mut out, gap);
        write_varint(&mut out, zigzag(r.eirp_centi_dbm as i64 - prev_eirp as i64));
        out.push(r.available as u8);
        write_xor_rle(&mut out, &r.aux, prev_aux);
        prev_theta = Some(theta);
        prev_eirp = r.eirp_centi_dbm;
        prev_aux = &r.aux;
    }
    Ok(out)
}

pub fn decompress_rows(bytes: &[u8], dims: &IndexDims) -> Result<Vec<SpectrumRecord>, DbError> {
    let mut cur = 0usize;
    let count = read_varint(bytes, &mut cur)? as usize;
    let mut records = Vec::with_capacity(count);
    let mut theta = 0u64;
    let mut eirp = 0i32;
    let mut prev_aux: Vec<u8> = Vec::new();
    for i in 0..count {
        let gap = read_varint(bytes, &mut cur)?;
        theta = if i == 0 { gap } else { theta + gap };
        eirp = (eirp as i64 + unzigzag(read_varint(bytes, &mut cur)?)) as i32;
        let available = match bytes.get(cur) {
            Some(0) => false,
            Some(1) => true,
            _ => return Err(DbError::Format("bad availability byte".into())),
        };
        cur += 1;
        let aux = read_xor_rle(bytes, &mut cur, &prev_aux)?;
        let (coord, channel, time_window) = db_unindex(theta as usize, dims)?;
        records.push(SpectrumRecord {
            coord,
            channel,
            time_window,
            eirp_centi_dbm: eirp,
            available,
            aux: aux.clone(),
        });
        prev_aux = aux;
    }
    if cur != bytes.len() {
        return Err(DbError::Format("trailing bytes in compressed stream".into()));
    }
    Ok(records)
}

fn zigzag(v: i64) -> u64 {
    ((v << 1) ^ (v >> 63)) as u64
}

fn unzigzag(v: u64) -> i64 {
    ((v >> 1) as i64) ^ -((v & 1) as i64)
}

fn write_varint(out: &mut Vec<u8>, mut v: u64) {
    loop {
        let byte = (v & 0x7f) as u8;
        v >>= 7;
        if v == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

fn read_varint(bytes: &[u8], cur: &mut usize) -> Result<u64, DbError> {
    let mut v = 0u64;
    let mut shift = 0u32;
    loop {
        let b = *bytes.get(*cur).ok_or_else(|| DbError::Format("truncated varint".into()))?;
        *cur += 1;
        if shift >= 64 {
            return Err(DbError::Format("varint overflow".into()));
        }
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Ok(v);
        }
        shift += 7;
    }
}

/// Payload encoding: varint length, then the bytes XORed against the
/// previous payload (zero-extended), as (zero-run, literal-run) pairs.
fn write_xor_rle(out: &mut Vec<u8>, aux: &[u8], prev: &[u8]) {
    write_varint(out, aux.len() as u64);
    let xored: Vec<u8> = aux
        .iter()
        .enumerate()
        .map(|(i, b)| b ^ prev.get(i).copied().unwrap_or(0))
        .collect();
    let mut i = 0usize;
    while i < xored.len() {
        let zero_start = i;
        while i < xored.len() && xored[i] == 0 {
            i += 1;
        }
        write_varint(out, (i - zero_start) as u64);
        let lit_start = i;
        while i < xored.len() && xored[i] != 0 {
            i += 1;
        }
        write_varint(out, (i - lit_start) as u64);
        out.extend_from_slice(&xored[lit_start..i]);
    }
}

fn read_xor_rle(bytes: &[u8], cur: &mut usize, prev: &[u8]) -> Result<Vec<u8>, DbError> {
    let len = read_varint(bytes, cur)? as usize;
    if len > crate::record::RECORD_BYTES {
        return Err(DbError::Format("payload length out of range".into()));
    }
    let mut xored = Vec::with_capacity(len);
    while xored.len() < len {
        let zeros = read_varint(bytes, cur)? as usize;
        let lits = read_varint(bytes, cur)? as usize;
        if xored.len() + zeros + lits > len {
            return Err(DbError::Format("run overflows payload".into()));
        }
        xored.resize(xored.len() + zeros, 0);
        let lit = bytes
            .get(*cur..*cur + lits)
            .ok_or_else(|| DbError::Format("truncated literal run".into()))?;
        xored.extend_from_slice(lit);
        *cur += lits;
    }
    Ok(xored
        .iter()
        .enumerate()
        .map(|(i, b)| b ^ prev.get(i).copied().unwrap_or(0))
        .collect())
}
