//! Completeness across ring sizes, exhaustive linkability, and tag
//! statistics.

use std::sync::Arc;

use crypto_backends::{SigBackend, SigKeypair};
use location_proof::{
    commit_location, derive_event_id, lrs_keygen, lrs_link, lrs_sign, lrs_verify, AccessPoint,
    EnvParams, IdealAttestor, LocXY, LrsKeypair, Measurements, PolRequest, RingContext,
};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

fn attestor() -> Arc<IdealAttestor> {
    IdealAttestor::new(SigKeypair::from_seed(SigBackend::InsecureStub, [42; 32]))
}

#[test]
fn completeness_across_ring_sizes() {
    let mut rng = ChaCha12Rng::seed_from_u64(61);
    let att = attestor();
    for k in 3..=10u32 {
        let size = 1usize << k;
        let keys: Vec<LrsKeypair> = (0..size).map(|_| lrs_keygen(&mut rng)).collect();
        let ring = RingContext::new(keys.iter().map(|kp| kp.pk).collect()).unwrap();
        let member = &keys[size / 2];
        let e = derive_event_id(&member.sk, &[k as u8; 8], k as u64);
        let start = std::time::Instant::now();
        let pol = lrs_sign(e, member, [5; 32], &ring, k as u64, att.as_ref()).unwrap();
        let sign_time = start.elapsed();
        assert!(lrs_verify(&e, &pol, &[5; 32], &ring.root(), k as u64, att.as_ref()));
        // Recorded for comparison against the published 20–60 ms band of the
        // zero-knowledge backend; the in-process attestor is far cheaper.
        println!("ring 2^{k:2}: sign {sign_time:?}, proof {} bytes", pol.sok_proof.len());
    }
}

#[test]
fn linkability_matrix_signer_by_window() {
    // 8 ring members × 4 windows, exhaustively: two proofs link exactly
    // when signer and window (event) agree.
    let mut rng = ChaCha12Rng::seed_from_u64(62);
    let att = attestor();
    let keys: Vec<LrsKeypair> = (0..8).map(|_| lrs_keygen(&mut rng)).collect();
    let ring = RingContext::new(keys.iter().map(|kp| kp.pk).collect()).unwrap();
    let beacon_nonces: Vec<[u8; 8]> = (0..4u8).map(|w| [w; 8]).collect();

    let mut proofs = Vec::new();
    for (s, key) in keys.iter().enumerate() {
        for w in 0..4usize {
            let e = derive_event_id(&key.sk, &beacon_nonces[w], w as u64);
            let pol = lrs_sign(e, key, [s as u8; 32], &ring, w as u64, att.as_ref()).unwrap();
            proofs.push((s, w, pol));
        }
    }
    for (sa, wa, pa) in &proofs {
        for (sb, wb, pb) in &proofs {
            let expected = sa == sb && wa == wb;
            assert_eq!(
                lrs_link(pa, pb),
                expected,
                "signer {sa} window {wa} vs signer {sb} window {wb}"
            );
        }
    }
}

#[test]
fn tags_show_no_collisions_and_balanced_bytes() {
    // 10^4 random secrets under one event id: all tags distinct, byte
    // frequencies roughly uniform.
    let mut rng = ChaCha12Rng::seed_from_u64(63);
    let att = attestor();
    let keys: Vec<LrsKeypair> = (0..2).map(|_| lrs_keygen(&mut rng)).collect();
    let ring = RingContext::new(keys.iter().map(|kp| kp.pk).collect()).unwrap();
    let e = [17u8; 32];

    let mut tags = std::collections::HashSet::new();
    let mut byte_counts = [0u64; 256];
    for _ in 0..10_000 {
        let k = lrs_keygen(&mut rng);
        // Tag derivation does not need ring membership; reuse the signing
        // path where possible but fall back to direct derivation for
        // non-members.
        let ring_of_one = RingContext::new(vec![k.pk]).unwrap();
        let pol = lrs_sign(e, &k, [0; 32], &ring_of_one, 0, att.as_ref()).unwrap();
        assert!(tags.insert(pol.tag), "tag collision");
        for b in pol.tag {
            byte_counts[b as usize] += 1;
        }
    }
    let _ = ring;
    let total: u64 = byte_counts.iter().sum();
    let expected = total as f64 / 256.0;
    for (value, &count) in byte_counts.iter().enumerate() {
        let dev = (count as f64 - expected).abs() / expected;
        assert!(dev < 0.25, "byte {value} frequency off by {dev:.3}");
    }
}

#[test]
fn end_to_end_against_access_point_with_real_signature_backend() {
    // One flow on the module-lattice signature backend to pin sizes.
    let mut rng = ChaCha12Rng::seed_from_u64(64);
    let signer = SigKeypair::from_seed(SigBackend::MlDsa44, [3; 32]);
    let verify_side = IdealAttestor::verify_only(SigBackend::MlDsa44, signer.public_key().to_vec());
    let att = IdealAttestor::new(signer);

    let keys: Vec<LrsKeypair> = (0..8).map(|_| lrs_keygen(&mut rng)).collect();
    let ring = Arc::new(RingContext::new(keys.iter().map(|kp| kp.pk).collect()).unwrap());
    let mut ap = AccessPoint::new(5, keys[1].clone(), ring.clone(), att, EnvParams::default(), 50.0);
    let beacon = ap.issue_beacon(9, &mut rng);
    let (commitment, opening) = commit_location(LocXY { x: 100, y: 200 }, &beacon, &mut rng);
    let measured = Measurements { rss_dbm: -45.0, rtt_s: 1e-7 };
    let (pol, event_id) = ap.pol_respond(&PolRequest { beacon, commitment }, measured).unwrap();

    assert!(lrs_verify(&event_id, &pol, &commitment.digest, &ring.root(), 9, verify_side.as_ref()));
    assert!(location_proof::verify_opening(&commitment, &opening));
    // Wire blob: 4 × 32-byte fields + length + the 2420-byte certificate.
    assert_eq!(pol.wire_bytes().len(), 132 + 2420);
}
