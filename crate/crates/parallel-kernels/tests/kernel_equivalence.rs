//! Bit-exact equivalence of the data-parallel kernels against the scalar
//! references, across fuzzed dimensions, worker counts and fetch policies.

use parallel_kernels::{
    backend_select, batch_matmul_field, batch_matvec_gf2, scalar_matmul_field, scalar_matvec_gf2,
    BatchFieldJob, BatchGf2Job, BitMatrix, FieldMatrix, KernelBackend, RowFetchPolicy, Tiling,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn random_bitmatrix(rng: &mut ChaCha12Rng, rows: usize, cols: usize, density: f64) -> BitMatrix {
    let mut m = BitMatrix::zero(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            if rng.random_bool(density) {
                m.set(r, c, true);
            }
        }
    }
    m
}

fn random_fieldmatrix(rng: &mut ChaCha12Rng, rows: usize, cols: usize, p: u64) -> FieldMatrix {
    let mut m = FieldMatrix::zero(rows, cols, p);
    for r in 0..rows {
        for c in 0..cols {
            m.set(r, c, rng.random_range(0..p) as u32);
        }
    }
    m
}

#[test]
fn gf2_matches_scalar_fold_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(11);
    let db = random_bitmatrix(&mut rng, 8, 64, 0.5);
    let q = random_bitmatrix(&mut rng, 1, 8, 0.5);
    let out = batch_matvec_gf2(&BatchGf2Job::new(&q, &db), 2).unwrap();
    let oracle = scalar_matvec_gf2(q.row_words(0), &db);
    assert_eq!(out.row_words(0), &oracle[..]);
}

#[test]
fn gf2_worker_count_and_policy_invariant() {
    let mut rng = ChaCha12Rng::seed_from_u64(12);
    let db = random_bitmatrix(&mut rng, 300, 770, 0.4);
    let q = random_bitmatrix(&mut rng, 37, 300, 0.3);
    let mut job = BatchGf2Job::new(&q, &db);
    let base = batch_matvec_gf2(&job, 1).unwrap();
    for workers in [2, 3, 8] {
        assert_eq!(batch_matvec_gf2(&job, workers).unwrap(), base);
    }
    job.policy = RowFetchPolicy::Bitmask;
    assert_eq!(batch_matvec_gf2(&job, 4).unwrap(), base);
}

#[test]
fn field_matches_schoolbook_oracle() {
    let mut rng = ChaCha12Rng::seed_from_u64(13);
    let p = 65537;
    let db = random_fieldmatrix(&mut rng, 64, 48, p);
    let q = random_fieldmatrix(&mut rng, 9, 64, p);
    let job = BatchFieldJob::new(&q, &db);
    let fast = batch_matmul_field(&job, 2).unwrap();
    // Independent schoolbook oracle, reduced every step.
    for i in 0..q.rows() {
        for j in 0..db.cols() {
            let mut acc = 0u64;
            for k in 0..db.rows() {
                acc = (acc + q.get(i, k) as u64 * db.get(k, j) as u64) % p;
            }
            assert_eq!(fast.get(i, j) as u64, acc);
        }
    }
}

#[test]
fn field_mod2_agrees_with_gf2_kernel() {
    let mut rng = ChaCha12Rng::seed_from_u64(14);
    let rows = 50;
    let cols = 96;
    let dbb = random_bitmatrix(&mut rng, rows, cols, 0.5);
    let qb = random_bitmatrix(&mut rng, 7, rows, 0.5);

    let mut dbf = FieldMatrix::zero(rows, cols, 2);
    let mut qf = FieldMatrix::zero(7, rows, 2);
    for r in 0..rows {
        for c in 0..cols {
            dbf.set(r, c, dbb.get(r, c) as u32);
        }
    }
    for i in 0..7 {
        for r in 0..rows {
            qf.set(i, r, qb.get(i, r) as u32);
        }
    }

    let bits = batch_matvec_gf2(&BatchGf2Job::new(&qb, &dbb), 2).unwrap();
    let words = batch_matmul_field(&BatchFieldJob::new(&qf, &dbf), 2).unwrap();
    for i in 0..7 {
        for c in 0..cols {
            assert_eq!(bits.get(i, c) as u32, words.get(i, c));
        }
    }
}

#[test]
fn backend_select_routes_both_paths() {
    let mut rng = ChaCha12Rng::seed_from_u64(15);
    let db = random_bitmatrix(&mut rng, 40, 128, 0.5);
    let q = random_bitmatrix(&mut rng, 5, 40, 0.5);
    let job = BatchGf2Job::new(&q, &db);
    let scalar = backend_select(KernelBackend::Scalar).matvec_gf2(&job).unwrap();
    let par = backend_select(KernelBackend::DataParallel { workers: 0 })
        .matvec_gf2(&job)
        .unwrap();
    assert_eq!(scalar, par);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn fuzzed_gf2_equivalence(seed in 0u64..1 << 20, rows in 1usize..200, cols in 1usize..300, batch in 1usize..24) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let db = random_bitmatrix(&mut rng, rows, cols, 0.5);
        let q = random_bitmatrix(&mut rng, batch, rows, 0.5);
        let out = batch_matvec_gf2(&BatchGf2Job::new(&q, &db), 4).unwrap();
        for i in 0..batch {
            let oracle = scalar_matvec_gf2(q.row_words(i), &db);
            prop_assert_eq!(out.row_words(i), &oracle[..]);
        }
    }

    #[test]
    fn fuzzed_field_equivalence(seed in 0u64..1 << 20, rows in 1usize..96, cols in 1usize..96, batch in 1usize..16) {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let p = *[3u64, 257, 65537].iter().nth((seed % 3) as usize).unwrap();
        let db = random_fieldmatrix(&mut rng, rows, cols, p);
        let q = random_fieldmatrix(&mut rng, batch, rows, p);
        let mut job = BatchFieldJob::new(&q, &db);
        job.tiling = Tiling { bm: 16, bn: 16, br: 8, tm: 8, tn: 8 };
        let fast = batch_matmul_field(&job, 3).unwrap();
        let slow = scalar_matmul_field(&job).unwrap();
        prop_assert_eq!(fast, slow);
    }
}
