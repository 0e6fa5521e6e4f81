//! Time-sensitive beacons broadcast per window.

use rand::RngCore;

/// One AP's beacon for one time window. Exactly one nonce exists per
/// (AP, window); clients must echo the latest one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Beacon {
    /// Opaque broadcast identifier of the AP.
    pub ap_hint: u64,
    pub window_id: u64,
    pub nonce: [u8; 8],
}

impl Beacon {
    pub fn issue(ap_hint: u64, window_id: u64, rng: &mut dyn RngCore) -> Beacon {
        let mut nonce = [0u8; 8];
        rng.fill_bytes(&mut nonce);
        Beacon { ap_hint, window_id, nonce }
    }
}
