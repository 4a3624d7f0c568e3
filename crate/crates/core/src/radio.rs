//! Thermal noise, downlink SINR and Shannon rate.

use crate::{db_to_linear, Error, Result};

/// Thermal noise over one user's channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub density_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub per_ue_bandwidth_hz: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self { density_dbm_hz: -174.0, noise_figure_db: 7.0, per_ue_bandwidth_hz: 200e3 }
    }
}

/// Noise power in dBm: density + 10·log10(B) + NF.
pub fn noise_power(model: &NoiseModel) -> f64 {
    model.density_dbm_hz + 10.0 * libm::log10(model.per_ue_bandwidth_hz) + model.noise_figure_db
}

/// SINR (linear) of `serving` when every BS flagged in `active` transmits
/// co-channel. Switched-off stations contribute no interference.
pub fn sinr(serving: usize, rx_powers_dbm: &[f64], active: &[bool], noise_dbm: f64) -> Result<f64> {
    if !active.get(serving).copied().unwrap_or(false) {
        return Err(Error::ServingNotActive(serving));
    }
    let total: f64 = rx_powers_dbm
        .iter()
        .zip(active)
        .filter(|(_, on)| **on)
        .map(|(p, _)| db_to_linear(*p))
        .sum();
    let signal = db_to_linear(rx_powers_dbm[serving]);
    Ok(sinr_linear(signal, total, db_to_linear(noise_dbm)))
}

/// SINR from linear powers: `signal / (noise + total_active - signal)`.
#[inline]
pub fn sinr_linear(signal_mw: f64, total_active_mw: f64, noise_mw: f64) -> f64 {
    // clamp guards the subtraction against rounding when the serving BS dominates
    let interference = (total_active_mw - signal_mw).max(0.0);
    signal_mw / (noise_mw + interference)
}

/// Shannon rate in bit/s over `bandwidth_hz`.
pub fn data_rate(sinr_linear: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * libm::log2(1.0 + sinr_linear)
}
