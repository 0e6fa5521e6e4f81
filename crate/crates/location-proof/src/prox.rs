//! Proximity estimation from signal strength and round-trip time.

use crate::PolError;

/// Log-distance path-loss environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvParams {
    /// Path-loss exponent (2 in free space).
    pub path_loss_exp: f64,
    /// Transmit power in dBm.
    pub tx_power_dbm: f64,
    /// Loss at the reference distance, dB.
    pub ref_loss_db: f64,
    /// Reference distance in meters.
    pub ref_dist_m: f64,
    /// Propagation speed, m/s.
    pub c_mps: f64,
}

impl Default for EnvParams {
    fn default() -> Self {
        EnvParams {
            path_loss_exp: 2.0,
            tx_power_dbm: 20.0,
            ref_loss_db: 40.0,
            ref_dist_m: 1.0,
            c_mps: 299_792_458.0,
        }
    }
}

/// Estimated distance: mean of the RSS-model inversion
/// d_RSS = d₀·10^((P_tx − L₀ − RSS)/(10·n)) and the time-of-flight
/// d_RTT = RTT·c/2.
pub fn prox_verif(rss_dbm: f64, rtt_s: f64, env: &EnvParams) -> Result<f64, PolError> {
    if !rss_dbm.is_finite() || !rtt_s.is_finite() || rtt_s < 0.0 {
        return Err(PolError::Parameter("non-finite or negative measurement".into()));
    }
    if !(env.path_loss_exp > 0.0 && env.ref_dist_m > 0.0 && env.c_mps > 0.0) {
        return Err(PolError::Parameter("environment parameters must be positive".into()));
    }
    let d_rss = env.ref_dist_m
        * 10f64.powf((env.tx_power_dbm - env.ref_loss_db - rss_dbm) / (10.0 * env.path_loss_exp));
    let d_rtt = rtt_s * env.c_mps / 2.0;
    let delta = (d_rss + d_rtt) / 2.0;
    if !delta.is_finite() {
        return Err(PolError::Parameter("distance estimate overflowed".into()));
    }
    Ok(delta)
}

/// Forward model: the RSS a receiver at distance d observes. Harnesses use
/// this to synthesize measurements; the inverse above recovers d exactly in
/// the noiseless case.
pub fn rss_at_distance(d_m: f64, env: &EnvParams) -> f64 {
    env.tx_power_dbm - env.ref_loss_db - 10.0 * env.path_loss_exp * (d_m / env.ref_dist_m).log10()
}
