//! Shamir-coded robust scheme.
//!
//! For every database row j the client samples a uniform degree-t polynomial
//! f_j with f_j(0) = e_θ[j] and hands server i the evaluations at its point
//! α_i = i+1. A server's answer is the query-vector × word-matrix product,
//! which makes each answer word the evaluation of a degree-t polynomial
//! whose constant term is the target block's word. Any k > t answers
//! reconstruct by interpolation at zero; with corrupted answers the word
//! streams decode through the unique-radius error corrector, which also
//! names the servers the error locator blames.

use parallel_kernels::{BatchFieldJob, FieldMatrix, KernelBackend};
use rand::RngCore;
use spectrum_db::DbMatrix;

use crate::field::{berlekamp_welch, PrimeField};
use crate::PirError;

/// Per-server query vectors plus the evaluation geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FtrQuery {
    /// per_server[i][j] = f_j(α_i), stored as u32 field elements.
    pub per_server: Vec<Vec<u32>>,
    /// α_i, pairwise distinct and nonzero (server i ↦ i+1).
    pub eval_points: Vec<u32>,
    pub privacy_degree: usize,
    pub modulus: u64,
}

pub fn ftr_query_gen(
    theta: usize,
    rows: usize,
    ell: usize,
    t: usize,
    modulus: u64,
    rng: &mut dyn RngCore,
) -> Result<FtrQuery, PirError> {
    if t >= ell {
        return Err(PirError::Parameter(format!(
            "privacy degree {t} must be below the server count {ell}"
        )));
    }
    if modulus <= ell as u64 + 1 {
        return Err(PirError::Parameter(format!(
            "field order {modulus} must exceed the server count {ell}"
        )));
    }
    if theta >= rows {
        return Err(PirError::Parameter(format!("index {theta} outside [0, {rows})")));
    }
    let field = PrimeField::new(modulus);
    let eval_points: Vec<u32> = (0..ell).map(|i| (i + 1) as u32).collect();
    let mut per_server = vec![vec![0u32; rows]; ell];
    let mut coeffs = vec![0u64; t + 1];
    for j in 0..rows {
        coeffs[0] = (j == theta) as u64;
        for c in coeffs.iter_mut().skip(1) {
            *c = uniform_mod(rng, modulus);
        }
        for (i, &x) in eval_points.iter().enumerate() {
            per_server[i][j] = field.eval(&coeffs, x as u64) as u32;
        }
    }
    Ok(FtrQuery { per_server, eval_points, privacy_degree: t, modulus })
}

fn uniform_mod(rng: &mut dyn RngCore, modulus: u64) -> u64 {
    // Rejection sampling over the smallest covering power of two.
    let bits = 64 - (modulus - 1).leading_zeros();
    loop {
        let v = rng.next_u64() >> (64 - bits);
        if v < modulus {
            return v;
        }
    }
}

/// Database viewed as an r × s_DB word matrix over the query field. Built
/// once per database epoch and shared by every respond call.
pub struct FtrDbView {
    words: FieldMatrix,
    block_bytes: usize,
}

impl FtrDbView {
    pub fn new(db: &DbMatrix, modulus: u64) -> Self {
        let rows = db.rows();
        let cols = db.words_per_row();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            data.extend(db.row_bytes(r).iter().map(|&b| b as u32));
        }
        FtrDbView { words: FieldMatrix::from_data(rows, cols, modulus, data), block_bytes: db.block_bytes() }
    }

    pub fn rows(&self) -> usize {
        self.words.rows()
    }

    pub fn word_count(&self) -> usize {
        self.words.cols()
    }

    pub fn block_bytes(&self) -> usize {
        self.block_bytes
    }
}

/// One server's answer: exact vector–matrix product mod p.
pub fn ftr_respond(query_vec: &[u32], view: &FtrDbView) -> Result<Vec<u32>, PirError> {
    Ok(ftr_respond_batch(std::slice::from_ref(&query_vec.to_vec()), view, KernelBackend::Scalar)?
        .pop()
        .unwrap())
}

pub fn ftr_respond_batch(
    queries: &[Vec<u32>],
    view: &FtrDbView,
    backend: KernelBackend,
) -> Result<Vec<Vec<u32>>, PirError> {
    let rows = view.words.rows();
    if queries.iter().any(|q| q.len() != rows) {
        return Err(PirError::Geometry(format!("query length must equal {rows} rows")));
    }
    let mut flat = Vec::with_capacity(queries.len() * rows);
    for q in queries {
        flat.extend_from_slice(q);
    }
    let qm = FieldMatrix::from_data(queries.len(), rows, view.words.modulus(), flat);
    let out = backend.matmul_field(&BatchFieldJob::new(&qm, &view.words))?;
    Ok((0..queries.len()).map(|i| out.row(i).to_vec()).collect())
}

/// Reconstruct the block from k answers (eval point, word vector).
///
/// With `nu_max` = 0 each word interpolates directly at zero; otherwise the
/// word streams run through unique decoding, correcting up to
/// ⌊(k−t−1)/2⌋ corrupted servers.
pub fn ftr_reconstruct(
    responses: &[(u32, Vec<u32>)],
    t: usize,
    modulus: u64,
    block_bytes: usize,
    nu_max: usize,
) -> Result<Vec<u8>, PirError> {
    let k = responses.len();
    if k < t + 1 {
        return Err(PirError::Incomplete { have: k, need: t + 1 });
    }
    let radius = (k - t - 1) / 2;
    let nu = nu_max.min(radius);
    let field = PrimeField::new(modulus);
    let words = responses[0].1.len();
    if responses.iter().any(|(_, w)| w.len() != words) || words < block_bytes {
        return Err(PirError::Geometry("answer word counts disagree".into()));
    }

    let mut out = vec![0u8; block_bytes];
    let mut points = vec![(0u64, 0u64); k];
    // Word positions usually share one corruption pattern (a lying server
    // corrupts its whole vector), but decoding is per word: correctness, not
    // speed, is what this path owes the caller.
    let mut suspects: Vec<u8> = Vec::new();
    for w in 0..block_bytes {
        for (i, (x, vec_w)) in responses.iter().enumerate() {
            points[i] = (*x as u64, vec_w[w] as u64);
        }
        let value = if nu == 0 {
            field.lagrange_at_zero(&points)
        } else {
            let (g, blamed) = berlekamp_welch(&field, &points, t, nu).map_err(|e| match e {
                PirError::Robustness { .. } => PirError::Robustness { suspected: suspects.clone() },
                other => other,
            })?;
            for x in blamed {
                let sid = (x - 1) as u8;
                if !suspects.contains(&sid) {
                    suspects.push(sid);
                }
            }
            field.eval(&g, 0)
        };
        if value > u8::MAX as u64 {
            return Err(PirError::Robustness { suspected: suspects });
        }
        out[w] = value as u8;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_FTR_MODULUS;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn t_zero_sends_unit_vector_verbatim() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let q = ftr_query_gen(3, 8, 4, 0, DEFAULT_FTR_MODULUS, &mut rng).unwrap();
        for i in 0..4 {
            for j in 0..8 {
                assert_eq!(q.per_server[i][j], (j == 3) as u32);
            }
        }
    }

    #[test]
    fn interpolating_any_subset_recovers_selector() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        let (theta, rows, ell, t) = (2usize, 5usize, 5usize, 2usize);
        let q = ftr_query_gen(theta, rows, ell, t, DEFAULT_FTR_MODULUS, &mut rng).unwrap();
        let field = PrimeField::new(DEFAULT_FTR_MODULUS);
        // Lagrange oracle over every (t+1)-subset of servers.
        for subset in [[0usize, 1, 2], [1, 2, 4], [0, 3, 4]] {
            for j in 0..rows {
                let pts: Vec<(u64, u64)> = subset
                    .iter()
                    .map(|&i| (q.eval_points[i] as u64, q.per_server[i][j] as u64))
                    .collect();
                assert_eq!(field.lagrange_at_zero(&pts), (j == theta) as u64);
            }
        }
    }

    #[test]
    fn too_few_responses_is_incomplete() {
        let resp = vec![(1u32, vec![0u32; 4])];
        assert_eq!(
            ftr_reconstruct(&resp, 1, DEFAULT_FTR_MODULUS, 4, 0),
            Err(PirError::Incomplete { have: 1, need: 2 })
        );
    }

    #[test]
    fn t_at_least_ell_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        assert!(matches!(
            ftr_query_gen(0, 4, 3, 3, DEFAULT_FTR_MODULUS, &mut rng),
            Err(PirError::Parameter(_))
        ));
    }
}
