//! XOR-share scheme over ℓ non-colluding, responsive servers.
//!
//! The client splits the unit selector e_θ into ℓ shares whose XOR is e_θ;
//! the first ℓ−1 are uniform, so any proper subset of shares is distributed
//! independently of θ. Each server folds the database rows its share
//! selects; XOR of all answers is the target block.

use parallel_kernels::{scalar_matvec_gf2, BatchGf2Job, BitMatrix, KernelBackend};
use rand::RngCore;
use spectrum_db::DbMatrix;

use crate::PirError;

/// ℓ query shares of r bits each, LSB-first bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnsQuery {
    pub shares: Vec<Vec<u8>>,
    pub rows: usize,
}

pub fn ens_query_gen(
    theta: usize,
    rows: usize,
    ell: usize,
    rng: &mut dyn RngCore,
) -> Result<EnsQuery, PirError> {
    if ell < 2 {
        return Err(PirError::Parameter(format!(
            "{ell} servers requested; the XOR-share scheme relies on at least 2 non-colluding servers"
        )));
    }
    if theta >= rows {
        return Err(PirError::Parameter(format!("index {theta} outside [0, {rows})")));
    }
    let nbytes = rows.div_ceil(8);
    let tail_mask = if rows % 8 == 0 { 0xffu8 } else { (1u8 << (rows % 8)) - 1 };
    let mut shares: Vec<Vec<u8>> = Vec::with_capacity(ell);
    let mut last = vec![0u8; nbytes];
    last[theta / 8] ^= 1 << (theta % 8);
    for _ in 0..ell - 1 {
        let mut share = vec![0u8; nbytes];
        rng.fill_bytes(&mut share);
        if let Some(b) = share.last_mut() {
            *b &= tail_mask;
        }
        for (l, s) in last.iter_mut().zip(&share) {
            *l ^= s;
        }
        shares.push(share);
    }
    shares.push(last);
    Ok(EnsQuery { shares, rows })
}

/// One server's answer: XOR-fold of the rows its share selects.
pub fn ens_respond(share: &[u8], db: &DbMatrix) -> Result<Vec<u8>, PirError> {
    if share.len() != db.rows().div_ceil(8) {
        return Err(PirError::Geometry(format!(
            "share is {} bytes for a {}-row database",
            share.len(),
            db.rows()
        )));
    }
    let q = BitMatrix::from_row_bytes(1, db.rows(), share);
    let folded = scalar_matvec_gf2(q.row_words(0), db.bit_matrix());
    Ok(words_to_block_bytes(&folded, db.block_bytes()))
}

/// Batched server path through the data-parallel kernel.
pub fn ens_respond_batch(
    shares: &[Vec<u8>],
    db: &DbMatrix,
    backend: KernelBackend,
) -> Result<Vec<Vec<u8>>, PirError> {
    let nbytes = db.rows().div_ceil(8);
    if shares.iter().any(|s| s.len() != nbytes) {
        return Err(PirError::Geometry("share length mismatch in batch".into()));
    }
    let mut flat = Vec::with_capacity(shares.len() * nbytes);
    for s in shares {
        flat.extend_from_slice(s);
    }
    let queries = BitMatrix::from_row_bytes(shares.len(), db.rows(), &flat);
    let out = backend.matvec_gf2(&BatchGf2Job::new(&queries, db.bit_matrix()))?;
    Ok((0..shares.len())
        .map(|i| {
            let mut bytes = out.row_bytes(i);
            bytes.truncate(db.block_bytes());
            bytes
        })
        .collect())
}

/// XOR of all ℓ payloads; every server must have answered.
pub fn ens_reconstruct(responses: &[Option<Vec<u8>>]) -> Result<Vec<u8>, PirError> {
    let have = responses.iter().filter(|r| r.is_some()).count();
    if have != responses.len() || responses.is_empty() {
        return Err(PirError::Incomplete { have, need: responses.len() });
    }
    let mut acc = responses[0].clone().unwrap();
    for r in &responses[1..] {
        let r = r.as_ref().unwrap();
        if r.len() != acc.len() {
            return Err(PirError::Geometry("response length mismatch".into()));
        }
        for (a, b) in acc.iter_mut().zip(r) {
            *a ^= b;
        }
    }
    Ok(acc)
}

pub(crate) fn words_to_block_bytes(words: &[u64], block_bytes: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(block_bytes);
    'outer: for w in words {
        for byte in w.to_le_bytes() {
            if out.len() == block_bytes {
                break 'outer;
            }
            out.push(byte);
        }
    }
    out.resize(block_bytes, 0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn tiny_db(rows_pow: u32) -> DbMatrix {
        let rows = 1usize << rows_pow;
        let mut bits = BitMatrix::zero(rows, 64 * 10);
        for r in 0..rows {
            for c in 0..64 * 10 {
                if (r * 31 + c * 7) % 5 < 2 {
                    bits.set(r, c, true);
                }
            }
        }
        DbMatrix::from_bit_matrix(bits).unwrap()
    }

    #[test]
    fn shares_xor_to_unit_vector() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        for theta in [0usize, 5, 14] {
            let q = ens_query_gen(theta, 15, 4, &mut rng).unwrap();
            let mut acc = vec![0u8; 2];
            for s in &q.shares {
                for (a, b) in acc.iter_mut().zip(s) {
                    *a ^= b;
                }
            }
            let mut unit = vec![0u8; 2];
            unit[theta / 8] = 1 << (theta % 8);
            assert_eq!(acc, unit);
        }
    }

    #[test]
    fn zero_share_forces_partner_to_unit() {
        struct ZeroRng;
        impl RngCore for ZeroRng {
            fn next_u32(&mut self) -> u32 {
                0
            }
            fn next_u64(&mut self) -> u64 {
                0
            }
            fn fill_bytes(&mut self, dest: &mut [u8]) {
                dest.fill(0);
            }
        }
        let q = ens_query_gen(2, 4, 2, &mut ZeroRng).unwrap();
        assert_eq!(q.shares[0], vec![0u8]);
        assert_eq!(q.shares[1], vec![0b0100u8]);
    }

    #[test]
    fn fewer_than_two_servers_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        assert!(matches!(ens_query_gen(0, 8, 1, &mut rng), Err(PirError::Parameter(_))));
    }

    #[test]
    fn respond_all_zero_and_unit() {
        let db = tiny_db(3);
        let zero = ens_respond(&[0u8], &db).unwrap();
        assert!(zero.iter().all(|&b| b == 0));
        let unit = ens_respond(&[0b0010_0000u8], &db).unwrap();
        assert_eq!(unit, db.row_bytes(5));
    }

    #[test]
    fn missing_response_is_incomplete() {
        let r = vec![Some(vec![1u8]), None, Some(vec![2u8])];
        assert_eq!(ens_reconstruct(&r), Err(PirError::Incomplete { have: 2, need: 3 }));
    }
}
