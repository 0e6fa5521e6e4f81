//! Benchmarks: batched retrieval kernels (scalar vs data-parallel) and
//! puzzle solve costs, reported as CSV.

use std::time::Instant;

use parallel_kernels::{
    batch_matmul_field, batch_matvec_gf2, scalar_matmul_field, scalar_matvec_gf2, BatchFieldJob,
    BatchGf2Job, BitMatrix, FieldMatrix,
};
use pow::{PowKind, Puzzle};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::config::SchemeChoice;

pub const PIR_CSV_HEADER: &str =
    "scheme,rows,db_bytes,batch,workers,backend,ms_total,ms_per_query,speedup_vs_scalar";
pub const POW_CSV_HEADER: &str = "pow,kappa,param,gen_ms,solve_ms,verify_ms,puzzle_bytes";

pub struct PirBenchRow {
    pub scheme: &'static str,
    pub rows: usize,
    pub db_bytes: usize,
    pub batch: usize,
    pub workers: usize,
    pub backend: &'static str,
    pub ms_total: f64,
    pub ms_per_query: f64,
    pub speedup_vs_scalar: f64,
}

impl PirBenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.3},{:.4},{:.2}",
            self.scheme,
            self.rows,
            self.db_bytes,
            self.batch,
            self.workers,
            self.backend,
            self.ms_total,
            self.ms_per_query,
            self.speedup_vs_scalar
        )
    }
}

/// Measure one (scheme, rows, batch) point: scalar reference and the
/// data-parallel kernel on `workers` threads.
pub fn bench_pir_point(
    scheme: SchemeChoice,
    rows: usize,
    block_bytes: usize,
    batch: usize,
    workers: usize,
    seed: u64,
) -> Vec<PirBenchRow> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let db_bytes = rows * block_bytes;
    match scheme {
        SchemeChoice::Ens | SchemeChoice::Oop => {
            // Both fold rows over GF(2); the offline scheme's online pass is
            // the same kernel over a 1/n slice.
            let mut db = BitMatrix::zero(rows, block_bytes * 8);
            for r in 0..rows {
                for w in db.row_words_mut(r) {
                    *w = rng.random();
                }
            }
            let mut q = BitMatrix::zero(batch, rows);
            for i in 0..batch {
                for r in 0..rows {
                    if rng.random_bool(0.5) {
                        q.set(i, r, true);
                    }
                }
            }
            let job = BatchGf2Job::new(&q, &db);
            let t0 = Instant::now();
            let mut scalar_out = Vec::with_capacity(batch);
            for i in 0..batch {
                scalar_out.push(scalar_matvec_gf2(q.row_words(i), &db));
            }
            let scalar_ms = t0.elapsed().as_secs_f64() * 1e3;
            let t1 = Instant::now();
            let fast = batch_matvec_gf2(&job, workers).expect("geometry is valid");
            let par_ms = t1.elapsed().as_secs_f64() * 1e3;
            for i in 0..batch {
                assert_eq!(fast.row_words(i), &scalar_out[i][..], "kernel mismatch");
            }
            let name = if scheme == SchemeChoice::Ens { "ens" } else { "oop" };
            vec![
                PirBenchRow {
                    scheme: name,
                    rows,
                    db_bytes,
                    batch,
                    workers: 1,
                    backend: "scalar",
                    ms_total: scalar_ms,
                    ms_per_query: scalar_ms / batch as f64,
                    speedup_vs_scalar: 1.0,
                },
                PirBenchRow {
                    scheme: name,
                    rows,
                    db_bytes,
                    batch,
                    workers,
                    backend: "data-parallel",
                    ms_total: par_ms,
                    ms_per_query: par_ms / batch as f64,
                    speedup_vs_scalar: scalar_ms / par_ms,
                },
            ]
        }
        SchemeChoice::Ftr => {
            let p = pir_core::DEFAULT_FTR_MODULUS;
            let cols = block_bytes;
            let mut db = FieldMatrix::zero(rows, cols, p);
            for r in 0..rows {
                for c in 0..cols {
                    db.set(r, c, (rng.random::<u32>() % 256) as u32);
                }
            }
            let mut q = FieldMatrix::zero(batch, rows, p);
            for i in 0..batch {
                for r in 0..rows {
                    q.set(i, r, rng.random_range(0..p) as u32);
                }
            }
            let job = BatchFieldJob::new(&q, &db);
            let t0 = Instant::now();
            let scalar = scalar_matmul_field(&job).expect("geometry is valid");
            let scalar_ms = t0.elapsed().as_secs_f64() * 1e3;
            let t1 = Instant::now();
            let fast = batch_matmul_field(&job, workers).expect("geometry is valid");
            let par_ms = t1.elapsed().as_secs_f64() * 1e3;
            assert_eq!(scalar, fast, "kernel mismatch");
            vec![
                PirBenchRow {
                    scheme: "ftr",
                    rows,
                    db_bytes,
                    batch,
                    workers: 1,
                    backend: "scalar",
                    ms_total: scalar_ms,
                    ms_per_query: scalar_ms / batch as f64,
                    speedup_vs_scalar: 1.0,
                },
                PirBenchRow {
                    scheme: "ftr",
                    rows,
                    db_bytes,
                    batch,
                    workers,
                    backend: "data-parallel",
                    ms_total: par_ms,
                    ms_per_query: par_ms / batch as f64,
                    speedup_vs_scalar: scalar_ms / par_ms,
                },
            ]
        }
    }
}

pub struct PowBenchRow {
    pub pow: &'static str,
    pub kappa: u32,
    pub param: String,
    pub gen_ms: f64,
    pub solve_ms: f64,
    pub verify_ms: f64,
    pub puzzle_bytes: usize,
}

impl PowBenchRow {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{:.3},{:.3},{:.3},{}",
            self.pow, self.kappa, self.param, self.gen_ms, self.solve_ms, self.verify_ms, self.puzzle_bytes
        )
    }
}

pub fn bench_pow_point(kind: PowKind, kappa: u32, seed: u64) -> PowBenchRow {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let t0 = Instant::now();
    let puzzle = Puzzle::generate(kind, kappa, &mut rng).expect("generation parameters valid");
    let gen_ms = t0.elapsed().as_secs_f64() * 1e3;
    let bytes = puzzle.to_bytes().len();
    let t1 = Instant::now();
    let solution = puzzle.solve().expect("solver within budget");
    let solve_ms = t1.elapsed().as_secs_f64() * 1e3;
    let t2 = Instant::now();
    puzzle.verify(&solution, b"bench-context").expect("honest solution verifies");
    let verify_ms = t2.elapsed().as_secs_f64() * 1e3;
    let (name, param) = match (&puzzle, kind) {
        (Puzzle::Hct(p), _) => ("hct", format!("leaves={}", p.n_leaves)),
        (Puzzle::Lbp(p), _) => ("lbp", format!("dim={}", p.n_dim)),
    };
    let mut rng2 = rng;
    let _: u64 = rng2.next_u64();
    PowBenchRow { pow: name, kappa, param, gen_ms, solve_ms, verify_ms, puzzle_bytes: bytes }
}
