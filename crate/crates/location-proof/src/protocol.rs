//! The request/response protocol between a client and an access point.

use std::sync::Arc;

use rand::RngCore;

use crate::beacon::Beacon;
use crate::commit::LocationCommitment;
use crate::lrs::{derive_event_id, lrs_sign, LrsKeypair, ProofOfLocation, RingContext, SokBackend};
use crate::prox::{prox_verif, EnvParams};
use crate::PolError;

/// Client → AP: echo of the beacon plus the location commitment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolRequest {
    pub beacon: Beacon,
    pub commitment: LocationCommitment,
}

/// Signal measurements the AP takes on the requesting client.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurements {
    pub rss_dbm: f64,
    pub rtt_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PolReject {
    /// The echoed beacon is not this AP's latest one.
    StaleBeacon,
    /// Estimated distance exceeded the threshold.
    TooFar { estimated_m: f64 },
    Backend(PolError),
}

/// One access point: ring member with a rolling beacon.
pub struct AccessPoint {
    pub keypair: LrsKeypair,
    pub ring: Arc<RingContext>,
    pub env: EnvParams,
    pub prox_threshold_m: f64,
    backend: Arc<dyn SokBackend>,
    ap_hint: u64,
    latest: Option<Beacon>,
}

impl AccessPoint {
    pub fn new(
        ap_hint: u64,
        keypair: LrsKeypair,
        ring: Arc<RingContext>,
        backend: Arc<dyn SokBackend>,
        env: EnvParams,
        prox_threshold_m: f64,
    ) -> AccessPoint {
        AccessPoint { keypair, ring, env, prox_threshold_m, backend, ap_hint, latest: None }
    }

    /// Roll to a new window; the previous beacon immediately goes stale.
    pub fn issue_beacon(&mut self, window_id: u64, rng: &mut dyn RngCore) -> Beacon {
        let beacon = Beacon::issue(self.ap_hint, window_id, rng);
        self.latest = Some(beacon);
        beacon
    }

    pub fn latest_beacon(&self) -> Option<Beacon> {
        self.latest
    }

    /// The signature-of-knowledge backend this AP proves under.
    pub fn backend_handle(&self) -> Arc<dyn SokBackend> {
        self.backend.clone()
    }

    /// Alg-2 response: freshness check, proximity check, event-id
    /// derivation, ring signature over the commitment.
    pub fn pol_respond(
        &self,
        request: &PolRequest,
        measured: Measurements,
    ) -> Result<(ProofOfLocation, [u8; 32]), PolReject> {
        let latest = self.latest.ok_or(PolReject::StaleBeacon)?;
        if request.beacon != latest {
            return Err(PolReject::StaleBeacon);
        }
        let estimated = prox_verif(measured.rss_dbm, measured.rtt_s, &self.env)
            .map_err(PolReject::Backend)?;
        if estimated > self.prox_threshold_m {
            return Err(PolReject::TooFar { estimated_m: estimated });
        }
        let event_id = derive_event_id(&self.keypair.sk, &latest.nonce, latest.window_id);
        let pol = lrs_sign(
            event_id,
            &self.keypair,
            request.commitment.digest,
            &self.ring,
            latest.window_id,
            self.backend.as_ref(),
        )
        .map_err(PolReject::Backend)?;
        Ok((pol, event_id))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commit::{commit_location, LocXY};
    use crate::lrs::{lrs_keygen, lrs_verify, IdealAttestor};
    use crate::prox::rss_at_distance;
    use crypto_backends::{SigBackend, SigKeypair};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn ap_with_ring(rng: &mut ChaCha12Rng) -> AccessPoint {
        let keys: Vec<LrsKeypair> = (0..4).map(|_| lrs_keygen(rng)).collect();
        let ring = Arc::new(RingContext::new(keys.iter().map(|k| k.pk).collect()).unwrap());
        let attestor = IdealAttestor::new(SigKeypair::from_seed(SigBackend::InsecureStub, [7; 32]));
        AccessPoint::new(1, keys[0].clone(), ring, attestor, EnvParams::default(), 50.0)
    }

    fn measured_at(d: f64, env: &EnvParams) -> Measurements {
        Measurements { rss_dbm: rss_at_distance(d, env), rtt_s: 2.0 * d / env.c_mps }
    }

    #[test]
    fn honest_flow_accepts() {
        let mut rng = ChaCha12Rng::seed_from_u64(51);
        let mut ap = ap_with_ring(&mut rng);
        let beacon = ap.issue_beacon(3, &mut rng);
        let (commitment, _) = commit_location(LocXY { x: 10, y: 20 }, &beacon, &mut rng);
        let request = PolRequest { beacon, commitment };
        let (pol, event_id) = ap.pol_respond(&request, measured_at(10.0, &ap.env)).unwrap();
        assert!(lrs_verify(
            &event_id,
            &pol,
            &commitment.digest,
            &ap.ring.root(),
            3,
            &IdealAttestor::verify_only(SigBackend::InsecureStub, {
                let att = IdealAttestor::new(SigKeypair::from_seed(SigBackend::InsecureStub, [7; 32]));
                att.public_key().to_vec()
            }) as &IdealAttestor,
        ));
    }

    #[test]
    fn stale_beacon_rejected_before_proximity() {
        let mut rng = ChaCha12Rng::seed_from_u64(52);
        let mut ap = ap_with_ring(&mut rng);
        let old = ap.issue_beacon(1, &mut rng);
        ap.issue_beacon(2, &mut rng);
        let (commitment, _) = commit_location(LocXY { x: 0, y: 0 }, &old, &mut rng);
        let request = PolRequest { beacon: old, commitment };
        // Even an absurd (negative-distance) measurement never runs: the
        // beacon check comes first.
        let r = ap.pol_respond(&request, Measurements { rss_dbm: f64::NAN, rtt_s: -1.0 });
        assert_eq!(r.unwrap_err(), PolReject::StaleBeacon);
    }

    #[test]
    fn distant_client_rejected() {
        let mut rng = ChaCha12Rng::seed_from_u64(53);
        let mut ap = ap_with_ring(&mut rng);
        let beacon = ap.issue_beacon(1, &mut rng);
        let (commitment, _) = commit_location(LocXY { x: 0, y: 0 }, &beacon, &mut rng);
        let request = PolRequest { beacon, commitment };
        match ap.pol_respond(&request, measured_at(500.0, &ap.env)) {
            Err(PolReject::TooFar { estimated_m }) => assert!((estimated_m - 500.0).abs() < 1.0),
            other => panic!("expected proximity reject, got {other:?}"),
        }
    }
}
