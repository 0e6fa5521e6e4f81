//! Acceptance suite: one test per criterion, each enforcing its stated
//! tolerance and runtime budget. The harness output is the per-criterion
//! pass/fail line.
//!
//! Heavy criteria serialize on a shared lock so timing-sensitive
//! measurements (the kernel speedup in particular) never contend for
//! cores with other tests.

use std::sync::Mutex;
use std::time::{Duration, Instant};

use crypto_backends::Prg;
use harness_cli::{run_sim, AttackKind, SimConfig};
use parallel_kernels::{batch_matvec_gf2, scalar_matvec_gf2, BatchGf2Job, BitMatrix};
use pir_core::ens::{ens_query_gen, ens_reconstruct, ens_respond};
use pir_core::ftr::{ftr_query_gen, ftr_reconstruct, ftr_respond, FtrDbView};
use pir_core::oop::{oop_query_gen, OopLayout, OopServer, Seed};
use pir_core::DEFAULT_FTR_MODULUS;
use pow::hct::{hct_gen, hct_solve, hct_verify_path, CountingHasher, Sha256Hasher};
use pow::lbp::{self, SolveEffort};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use spectrum_db::DbMatrix;

static HEAVY: Mutex<()> = Mutex::new(());

fn heavy_guard() -> std::sync::MutexGuard<'static, ()> {
    HEAVY.lock().unwrap_or_else(|e| e.into_inner())
}

fn random_db(rng: &mut ChaCha12Rng, rows: usize, block_bits: usize) -> DbMatrix {
    let mut bits = BitMatrix::zero(rows, block_bits);
    for r in 0..rows {
        for w in bits.row_words_mut(r) {
            *w = rng.random();
        }
    }
    DbMatrix::from_bit_matrix(bits).unwrap()
}

fn subsets(k: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, k: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..k {
            cur.push(i);
            rec(i + 1, k, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, k, size, &mut Vec::new(), &mut out);
    out
}

const BLOCK_3KB_BITS: usize = 3 * 1024 * 8;

/// Criterion 1 — scheme correctness: 1000 randomized desk-scale instances
/// per scheme reconstruct DB[θ] bit-exactly against the row-lookup oracle,
/// within two minutes.
#[test]
fn criterion_01_pir_correctness_all_schemes() {
    let _guard = heavy_guard();
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(1001);

    for trial in 0..1000 {
        // Mostly small row counts with periodic 2^12 instances.
        let rows = if trial % 100 == 99 { 1 << 12 } else { 16 << (trial % 4) };
        let db = random_db(&mut rng, rows, BLOCK_3KB_BITS);
        let theta = rng.random_range(0..rows);
        let ell = rng.random_range(2..=5);
        let q = ens_query_gen(theta, rows, ell, &mut rng).unwrap();
        let answers: Vec<Option<Vec<u8>>> =
            q.shares.iter().map(|s| Some(ens_respond(s, &db).unwrap())).collect();
        assert_eq!(ens_reconstruct(&answers).unwrap(), db.row_bytes(theta), "ens trial {trial}");
    }

    for trial in 0..1000 {
        let rows = if trial % 200 == 199 { 1 << 12 } else { 16 << (trial % 3) };
        let db = random_db(&mut rng, rows, BLOCK_3KB_BITS);
        let view = FtrDbView::new(&db, DEFAULT_FTR_MODULUS);
        let theta = rng.random_range(0..rows);
        let ell = rng.random_range(2..=7);
        let t = rng.random_range(1..ell);
        let q = ftr_query_gen(theta, rows, ell, t, DEFAULT_FTR_MODULUS, &mut rng).unwrap();
        let responses: Vec<(u32, Vec<u32>)> = (0..ell)
            .map(|i| (q.eval_points[i], ftr_respond(&q.per_server[i], &view).unwrap()))
            .collect();
        let block =
            ftr_reconstruct(&responses, t, DEFAULT_FTR_MODULUS, db.block_bytes(), 0).unwrap();
        assert_eq!(block, db.row_bytes(theta), "ftr trial {trial}");
    }

    for trial in 0..1000 {
        let n = [2usize, 4, 8][trial % 3];
        let rows = if trial % 100 == 99 { 1 << 12 } else { n * (8 << (trial % 3)) };
        let db = random_db(&mut rng, rows, BLOCK_3KB_BITS);
        let layout = OopLayout::shuffled(n, n, &mut rng);
        let theta = rng.random_range(0..rows);
        let mut servers: Vec<OopServer> = (0..n)
            .map(|i| {
                let mut s =
                    OopServer::new(i as u8, layout.per_server[i].clone(), rows / n, Prg::Shake256);
                s.preprocess(&db, 1, &mut rng);
                s
            })
            .collect();
        let seeds: Vec<(u64, Seed)> = servers.iter_mut().map(|s| s.handshake().unwrap()).collect();
        let subs = oop_query_gen(theta, rows, &seeds, &layout, Prg::Shake256).unwrap();
        let answers: Vec<Option<Vec<u8>>> = servers
            .iter_mut()
            .zip(&subs)
            .map(|(s, sub)| Some(s.respond(&db, sub.session, &sub.bits).unwrap()))
            .collect();
        assert_eq!(
            pir_core::oop::oop_reconstruct(&answers).unwrap(),
            db.row_bytes(theta),
            "oop trial {trial}"
        );
    }

    assert!(
        started.elapsed() < Duration::from_secs(120),
        "criterion 1 exceeded its 2-minute budget: {:?}",
        started.elapsed()
    );
}

/// Criterion 2 — perfect privacy of the XOR-share scheme: at r = 4, ℓ = 2,
/// exhaustive enumeration of the randomness shows per-server query
/// distributions identical for every index (exact count equality), in under
/// a second.
#[test]
fn criterion_02_ens_perfect_privacy_exhaustive() {
    struct ScriptRng(u8);
    impl RngCore for ScriptRng {
        fn next_u32(&mut self) -> u32 {
            self.0 as u32
        }
        fn next_u64(&mut self) -> u64 {
            self.0 as u64
        }
        fn fill_bytes(&mut self, dest: &mut [u8]) {
            dest.fill(self.0);
        }
    }

    let started = Instant::now();
    let mut views = vec![[[0u32; 16]; 2]; 4];
    for theta in 0..4usize {
        for coin in 0..16u8 {
            let q = ens_query_gen(theta, 4, 2, &mut ScriptRng(coin)).unwrap();
            views[theta][0][(q.shares[0][0] & 0xf) as usize] += 1;
            views[theta][1][(q.shares[1][0] & 0xf) as usize] += 1;
        }
    }
    for server in 0..2 {
        for theta in 1..4 {
            assert_eq!(
                views[0][server], views[theta][server],
                "server {server} view distribution differs between theta 0 and {theta}"
            );
        }
        assert!(views[0][server].iter().all(|&c| c == 1), "views must be exactly uniform");
    }
    assert!(started.elapsed() < Duration::from_secs(1));
}

/// Criterion 3 — robust reconstruction at the unique-decoding radius: for
/// all ℓ ≤ 7, t < ℓ, k ≤ ℓ answers and ν ≤ ⌊(k−t−1)/2⌋, every
/// corruption-position subset leaves the block intact. The larger
/// list-decoding radius ν < k − ⌊√(kt)⌋ is intentionally NOT attained; the
/// decoder sits behind an interface so a list decoder can replace it.
#[test]
fn criterion_03_ftr_robustness_unique_decoding_radius() {
    let mut rng = ChaCha12Rng::seed_from_u64(1003);
    let db = random_db(&mut rng, 8, 512);
    let view = FtrDbView::new(&db, DEFAULT_FTR_MODULUS);
    let mut cases = 0u64;
    for ell in 2..=7usize {
        for t in 1..ell {
            let theta = (3 * ell + t) % db.rows();
            let q = ftr_query_gen(theta, db.rows(), ell, t, DEFAULT_FTR_MODULUS, &mut rng).unwrap();
            let answers: Vec<Vec<u32>> =
                q.per_server.iter().map(|v| ftr_respond(v, &view).unwrap()).collect();
            for k in (t + 1)..=ell {
                let radius = (k - t - 1) / 2;
                for nu in 0..=radius {
                    for positions in subsets(k, nu) {
                        let mut responses: Vec<(u32, Vec<u32>)> =
                            (0..k).map(|i| (q.eval_points[i], answers[i].clone())).collect();
                        for &p in &positions {
                            for w in responses[p].1.iter_mut() {
                                *w = (*w ^ 0x1234) % DEFAULT_FTR_MODULUS as u32;
                            }
                        }
                        let block = ftr_reconstruct(
                            &responses,
                            t,
                            DEFAULT_FTR_MODULUS,
                            db.block_bytes(),
                            nu,
                        )
                        .unwrap_or_else(|e| {
                            panic!("ell={ell} t={t} k={k} nu={nu} at {positions:?}: {e}")
                        });
                        assert_eq!(block, db.row_bytes(theta));
                        cases += 1;
                    }
                }
            }
        }
    }
    println!("criterion 3 covered {cases} corruption patterns");
}

/// Criterion 4 — cross-scheme equivalence: 200 random (DB, θ) pairs return
/// identical blocks via the XOR-share and the offline-online schemes,
/// including per-server chunk permutations.
#[test]
fn criterion_04_oop_ens_equivalence() {
    let mut rng = ChaCha12Rng::seed_from_u64(1004);
    for trial in 0..200 {
        let n = [2usize, 4][trial % 2];
        let rows = n * 16;
        let db = random_db(&mut rng, rows, 512);
        let theta = rng.random_range(0..rows);

        let q = ens_query_gen(theta, rows, n, &mut rng).unwrap();
        let ens_answers: Vec<Option<Vec<u8>>> =
            q.shares.iter().map(|s| Some(ens_respond(s, &db).unwrap())).collect();
        let via_ens = ens_reconstruct(&ens_answers).unwrap();

        let layout = OopLayout::shuffled(n, n, &mut rng);
        let mut servers: Vec<OopServer> = (0..n)
            .map(|i| {
                let mut s =
                    OopServer::new(i as u8, layout.per_server[i].clone(), rows / n, Prg::Shake256);
                s.preprocess(&db, 1, &mut rng);
                s
            })
            .collect();
        let seeds: Vec<(u64, Seed)> = servers.iter_mut().map(|s| s.handshake().unwrap()).collect();
        let subs = oop_query_gen(theta, rows, &seeds, &layout, Prg::Shake256).unwrap();
        let oop_answers: Vec<Option<Vec<u8>>> = servers
            .iter_mut()
            .zip(&subs)
            .map(|(s, sub)| Some(s.respond(&db, sub.session, &sub.bits).unwrap()))
            .collect();
        let via_oop = pir_core::oop::oop_reconstruct(&oop_answers).unwrap();

        assert_eq!(via_ens, via_oop, "trial {trial}");
        assert_eq!(via_ens, db.row_bytes(theta), "trial {trial}");
    }
}

/// Criterion 5 — kernel exactness and scaling: the data-parallel kernel is
/// bit-exact against the scalar reference over fuzzed dimensions, and at
/// q̄ = 128, r = 2^14, b = 3 KB it runs ≥ 2× faster than the per-query
/// scalar loop when given ≥ 4 workers. The published GPU speedups are not
/// reproducible on CPU hardware; this monotonic-speedup property
/// substitutes, and `bench pir` reports measured ratios for comparison.
#[test]
fn criterion_05_kernel_exactness_and_speedup() {
    let _guard = heavy_guard();
    let mut rng = ChaCha12Rng::seed_from_u64(1005);

    // Fuzzed exactness sweep.
    for _ in 0..100 {
        let rows = rng.random_range(1..300);
        let cols = rng.random_range(1..2000);
        let batch = rng.random_range(1..40);
        let mut db = BitMatrix::zero(rows, cols);
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
        let out = batch_matvec_gf2(&BatchGf2Job::new(&q, &db), 4).unwrap();
        for i in 0..batch {
            assert_eq!(out.row_words(i), &scalar_matvec_gf2(q.row_words(i), &db)[..]);
        }
    }

    // Speedup at the pinned dimensions, best-of-three per path.
    let rows = 1 << 14;
    let db = random_db(&mut rng, rows, BLOCK_3KB_BITS);
    let mut q = BitMatrix::zero(128, rows);
    for i in 0..128 {
        for r in 0..rows {
            if rng.random_bool(0.5) {
                q.set(i, r, true);
            }
        }
    }
    let job = BatchGf2Job::new(&q, db.bit_matrix());
    let _warm = batch_matvec_gf2(&job, 4).unwrap();

    let mut par_best = f64::MAX;
    let mut scalar_best = f64::MAX;
    let mut parallel_out = None;
    for _ in 0..3 {
        let t = Instant::now();
        let out = batch_matvec_gf2(&job, 4).unwrap();
        par_best = par_best.min(t.elapsed().as_secs_f64());
        parallel_out = Some(out);
    }
    let mut scalar_out = Vec::new();
    for _ in 0..3 {
        let t = Instant::now();
        scalar_out = (0..128).map(|i| scalar_matvec_gf2(q.row_words(i), db.bit_matrix())).collect();
        scalar_best = scalar_best.min(t.elapsed().as_secs_f64());
    }
    let parallel_out = parallel_out.unwrap();
    for i in 0..128 {
        assert_eq!(parallel_out.row_words(i), &scalar_out[i][..]);
    }
    let speedup = scalar_best / par_best;
    println!(
        "criterion 5 speedup: scalar {:.1} ms, parallel {:.1} ms, ratio {speedup:.2}x",
        scalar_best * 1e3,
        par_best * 1e3
    );
    assert!(speedup >= 2.0, "parallel/scalar speedup {speedup:.2} below 2.0");
}

/// Criterion 6 — hashcash work factor at κ = 16: mean leaf attempts over 50
/// trials inside [2^15, 2^17], and verification costs exactly
/// ⌈log₂ n_l⌉ + 1 hash calls, within three minutes.
#[test]
fn criterion_06_hct_work_factor_and_log_verification() {
    let _guard = heavy_guard();
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(1006);

    let mut leaf_attempts = 0u64;
    let mut leaves = 0u64;
    for _ in 0..50 {
        let puzzle = hct_gen(16, 2, &mut rng).unwrap();
        let (_, stats) = hct_solve(&puzzle, &Sha256Hasher);
        leaf_attempts += stats.leaf_attempts;
        leaves += puzzle.n_leaves as u64;
    }
    let mean = leaf_attempts as f64 / leaves as f64;
    println!("criterion 6 mean leaf attempts: {mean:.0}");
    assert!(
        (mean as u64) >= (1 << 15) && (mean as u64) <= (1 << 17),
        "mean {mean:.0} outside [2^15, 2^17]"
    );

    for n_l in [2u8, 4, 8, 16, 32] {
        let puzzle = hct_gen(4, n_l, &mut rng).unwrap();
        let (solution, _) = hct_solve(&puzzle, &Sha256Hasher);
        let counting = CountingHasher::new(&Sha256Hasher);
        let leaf = (n_l / 2) as u32;
        let proof = solution.path_proof(&puzzle, leaf);
        hct_verify_path(&puzzle, solution.root_nonce(), &proof, &counting).unwrap();
        assert_eq!(
            counting.calls(),
            (n_l as u64).ilog2() as u64 + 1,
            "hash count at n_l={n_l}"
        );
    }

    assert!(
        started.elapsed() < Duration::from_secs(180),
        "criterion 6 exceeded its 3-minute budget: {:?}",
        started.elapsed()
    );
}

/// Criterion 7 — lattice puzzle soundness: 100 random puzzles at dimensions
/// 10–40 solve and verify; an exhaustive short-vector oracle at a
/// downscaled dimension-5 instance confirms the norm bound; scaled and
/// tampered solutions are rejected. Within five minutes.
#[test]
fn criterion_07_lbp_soundness() {
    let _guard = heavy_guard();
    let started = Instant::now();
    let mut rng = ChaCha12Rng::seed_from_u64(1007);

    for trial in 0..100 {
        let n = rng.random_range(10..=40);
        let puzzle = lbp::lbp_gen(n, &mut rng).unwrap();
        let solution = lbp::lbp_solve(&puzzle, SolveEffort::default())
            .unwrap_or_else(|e| panic!("trial {trial} dim {n}: {e}"));
        lbp::lbp_verify(&puzzle, &solution).unwrap();

        if trial % 25 == 0 {
            let doubled = lbp::LbpSolution {
                v: solution.v.iter().map(|c| c * 2).collect(),
                nu: solution.nu.iter().map(|c| c * 2).collect(),
            };
            assert!(lbp::lbp_verify(&puzzle, &doubled).is_err(), "doubled norm must reject");
            let mut perturbed = solution.clone();
            perturbed.v[0] += 1;
            assert!(lbp::lbp_verify(&puzzle, &perturbed).is_err(), "membership must reject");
        }
    }

    // Downscaled exhaustive oracle: dimension 5 with a 25-bit modulus keeps
    // the search box enumerable. The oracle scans every candidate tail
    // (v_1..v_4) and takes the centered residue for v_0.
    let puzzle = lbp::lbp_gen_custom(5, 25, &mut rng).unwrap();
    let solution = lbp::lbp_solve(&puzzle, SolveEffort::default()).unwrap();
    lbp::lbp_verify(&puzzle, &solution).unwrap();
    let bound_sq_big = puzzle.norm_bound_sq();
    let bound_sq: i128 = bound_sq_big.to_string().parse().unwrap();
    let solver_norm: i128 = pow_norm_sq_i128(&solution.v);
    let oracle_min = exhaustive_min_norm_sq(&puzzle, bound_sq);
    println!(
        "criterion 7 oracle: solver norm² {solver_norm}, exhaustive λ1² {oracle_min}, bound² {bound_sq}"
    );
    assert!(solver_norm <= bound_sq, "solver exceeded the bound");
    assert!(oracle_min <= solver_norm, "oracle found nothing shorter or equal");
    assert!(oracle_min <= bound_sq, "oracle confirms a vector within the bound exists");

    assert!(
        started.elapsed() < Duration::from_secs(300),
        "criterion 7 exceeded its 5-minute budget: {:?}",
        started.elapsed()
    );
}

fn pow_norm_sq_i128(v: &[num_bigint_reexport::BigInt]) -> i128 {
    v.iter()
        .map(|c| {
            let x: i128 = c.to_string().parse().unwrap();
            x * x
        })
        .sum()
}

/// Small re-export shim so the acceptance crate does not need its own
/// bigint dependency pin.
mod num_bigint_reexport {
    pub use pow::lbp::BigIntAlias as BigInt;
}

fn exhaustive_min_norm_sq(puzzle: &lbp::LbpPuzzle, bound_sq: i128) -> i128 {
    let p: i128 = puzzle.p.to_string().parse().unwrap();
    let xs: Vec<i128> = puzzle.xs.iter().map(|x| x.to_string().parse().unwrap()).collect();
    let b = (bound_sq as f64).sqrt().floor() as i128;
    let mut best = i128::MAX;
    for v1 in -b..=b {
        for v2 in -b..=b {
            for v3 in -b..=b {
                for v4 in -b..=b {
                    let tail = v1 * v1 + v2 * v2 + v3 * v3 + v4 * v4;
                    if tail > bound_sq && (v1, v2, v3, v4) != (0, 0, 0, 0) {
                        continue;
                    }
                    let w = (xs[0] * v1 + xs[1] * v2 + xs[2] * v3 + xs[3] * v4).rem_euclid(p);
                    for v0 in [w, w - p] {
                        let norm = v0 * v0 + tail;
                        if norm < best && (v0, v1, v2, v3, v4) != (0, 0, 0, 0, 0) {
                            best = norm;
                        }
                    }
                }
            }
        }
    }
    best
}

/// Criterion 8 — linkability semantics and rate limiting: over an
/// exhaustive 8-member-ring × 4-window matrix, proofs link exactly when
/// signer and window agree; flooding 100 queries through one AP in one
/// window yields exactly one acceptance.
#[test]
fn criterion_08_pol_linkability_and_rate_limit() {
    use crypto_backends::{SigBackend, SigKeypair};
    use location_proof::{derive_event_id, lrs_keygen, lrs_link, lrs_sign, IdealAttestor, RingContext};

    let mut rng = ChaCha12Rng::seed_from_u64(1008);
    let attestor = IdealAttestor::new(SigKeypair::from_seed(SigBackend::InsecureStub, [5; 32]));
    let keys: Vec<_> = (0..8).map(|_| lrs_keygen(&mut rng)).collect();
    let ring = RingContext::new(keys.iter().map(|k| k.pk).collect()).unwrap();
    let mut proofs = Vec::new();
    for (s, key) in keys.iter().enumerate() {
        for w in 0..4u64 {
            let e = derive_event_id(&key.sk, &[w as u8; 8], w);
            let pol = lrs_sign(e, key, [s as u8; 32], &ring, w, attestor.as_ref()).unwrap();
            proofs.push((s, w, pol));
        }
    }
    for (sa, wa, pa) in &proofs {
        for (sb, wb, pb) in &proofs {
            assert_eq!(lrs_link(pa, pb), sa == sb && wa == wb);
        }
    }

    let cfg = SimConfig {
        n_users: 1,
        flood_queries: 100,
        db_rows: 64,
        kappa: 6,
        ring_size: 16,
        seed: 1008,
        mldsa: false,
        ..SimConfig::default()
    };
    let report = run_sim(&cfg).expect("flood simulation runs");
    assert_eq!(report.flood_attempts, 100);
    assert_eq!(report.flood_accepted, 1, "exactly one flooded query may pass per AP per window");
}

/// Criterion 9 — transport-layer properties: a sentinel payload never
/// appears in any frame touching the entry or middle relay, per-hop
/// knowledge holds, and a 50 KB block fragments and reassembles bit-exact.
#[test]
fn criterion_09_onion_layring() {
    use crypto_backends::{KemBackend, KemKeypair};
    use onion_transport::{
        parse_deliver, reply_frame, CircuitBuilder, Directory, Frame, NetCtx, Node, OnionClient,
        RelayDescriptor, RelayNode, RelayRole, SimNet, CLIENT_NODE,
    };

    struct Echo;
    impl Node for Echo {
        fn on_frame(&mut self, frame: &Frame, ctx: &mut NetCtx) {
            if let Some((circuit, payload)) = parse_deliver(&frame.bytes) {
                ctx.send(frame.src, reply_frame(circuit, payload));
            }
        }
    }

    let backend = KemBackend::InsecureStub;
    let mut net = SimNet::new(1);
    let mut directory = Directory::new(backend);
    for (id, role, seed) in
        [(1u32, RelayRole::Entry, 1u8), (2, RelayRole::Middle, 2), (3, RelayRole::Exit, 3)]
    {
        let kp = KemKeypair::from_seed(backend, [seed; 64]);
        directory
            .register(RelayDescriptor { node_id: id, role, kem_public: kp.public_key().to_vec() });
        net.add_node(id, Box::new(RelayNode::new(id, kp)));
    }
    net.add_node(9, Box::new(Echo));

    let mut rng = ChaCha12Rng::seed_from_u64(1009);
    let builder = CircuitBuilder { kem_backend: backend };
    let mut circuit = builder.build(&mut net, &directory, 77, &mut rng).unwrap();

    let mut block = vec![0u8; 50 * 1024];
    rng.fill_bytes(&mut block);
    let sentinel = b"QPDB-SENTINEL-BYTES-314159";
    block[1000..1000 + sentinel.len()].copy_from_slice(sentinel);
    let replies = OnionClient::exchange(&mut net, &mut circuit, 9, &block).unwrap();
    assert_eq!(replies, vec![block.clone()], "50 KB block reassembles bit-exact");

    for frame in &net.recorded_frames {
        if [1u32, 2].iter().any(|&r| frame.src == r || frame.dst == r) {
            assert!(
                frame.bytes.windows(sentinel.len()).all(|w| w != sentinel),
                "plaintext sentinel visible at an intermediate relay ({} -> {})",
                frame.src,
                frame.dst
            );
        }
    }
    net.inspect(1, |r: &RelayNode| {
        assert!(r.observed_peers.contains(&CLIENT_NODE) && r.observed_peers.contains(&2));
        assert!(!r.observed_peers.contains(&3) && !r.observed_peers.contains(&9));
    })
    .unwrap();
    net.inspect(2, |r: &RelayNode| {
        assert!(r.observed_peers.contains(&1) && r.observed_peers.contains(&3));
        assert!(!r.observed_peers.contains(&CLIENT_NODE) && !r.observed_peers.contains(&9));
    })
    .unwrap();
    net.inspect(3, |r: &RelayNode| {
        assert!(r.observed_peers.contains(&2) && r.observed_peers.contains(&9));
        assert!(!r.observed_peers.contains(&CLIENT_NODE) && !r.observed_peers.contains(&1));
    })
    .unwrap();
}

/// Criterion 10 — end-to-end determinism at 2^6 users: three runs under one
/// seed produce identical transcript digests, every honest client is
/// granted, and all five attack archetypes land on their codes, within a
/// minute.
#[test]
fn criterion_10_end_to_end_determinism() {
    let _guard = heavy_guard();
    let started = Instant::now();
    let cfg = SimConfig {
        n_users: 64,
        ring_size: 128,
        db_rows: 256,
        kappa: 8,
        seed: 20260808,
        mldsa: true,
        ..SimConfig::default()
    };
    let reports: Vec<_> = (0..3).map(|_| run_sim(&cfg).expect("simulation runs")).collect();
    assert_eq!(reports[0].transcript_digest, reports[1].transcript_digest);
    assert_eq!(reports[1].transcript_digest, reports[2].transcript_digest);
    for report in &reports {
        assert_eq!(report.honest_granted, 64, "all honest clients granted");
        assert_eq!(report.attack_results.len(), AttackKind::all().len());
        for (kind, code) in &report.attack_results {
            assert_eq!(*code, kind.expected_code(), "attack {} code", kind.name());
        }
    }
    println!("criterion 10 digest: {}", reports[0].digest_hex());
    assert!(
        started.elapsed() < Duration::from_secs(60),
        "criterion 10 exceeded its 1-minute budget: {:?}",
        started.elapsed()
    );
}

/// Criterion 11 — size conformance: the hashcash puzzle serializes to
/// exactly 37 bytes and the dimension-150 lattice puzzle to exactly
/// 28133 bytes.
#[test]
fn criterion_11_puzzle_size_conformance() {
    let mut rng = ChaCha12Rng::seed_from_u64(1011);
    let hct = hct_gen(20, 2, &mut rng).unwrap();
    assert_eq!(hct.to_bytes().len(), 37);

    let lbp = lbp::lbp_gen(150, &mut rng).unwrap();
    assert_eq!(lbp.to_bytes().len(), 28133);
}
