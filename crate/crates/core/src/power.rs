//! EARTH-style base station power model.
//!
//! An active station draws `P_C + ξ·ρ·P_max`; a sleeping small cell draws
//! `P_s`. The HAPS uses the macro variant of the same affine model and never
//! sleeps.

use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    /// Constant draw while active, W.
    pub p_c: f64,
    /// Slope of the load-dependent part.
    pub slope: f64,
    /// Maximum transmit power, W.
    pub p_max: f64,
    /// Sleep-mode draw, W.
    pub p_sleep: f64,
}

impl PowerProfile {
    pub const SMALL_CELL: PowerProfile = PowerProfile { p_c: 56.0, slope: 2.6, p_max: 6.3, p_sleep: 39.0 };
    /// The HAPS has no sleep state; `p_sleep` is unused.
    pub const HAPS: PowerProfile = PowerProfile { p_c: 130.0, slope: 4.7, p_max: 20.0, p_sleep: 0.0 };

    pub fn is_valid(&self) -> bool {
        [self.p_c, self.slope, self.p_max, self.p_sleep].iter().all(|v| v.is_finite() && *v >= 0.0)
            && self.p_sleep < self.p_c
    }

    fn active_power(&self, rho: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::LoadOutOfRange(rho));
        }
        Ok(self.p_c + self.slope * rho * self.p_max)
    }
}

/// Small-cell draw at load `rho`, or its sleep draw when switched off.
pub fn sc_power(profile: &PowerProfile, rho: f64, active: bool) -> Result<f64> {
    let p = profile.active_power(rho)?;
    Ok(if active { p } else { profile.p_sleep })
}

/// HAPS draw at load `rho`.
pub fn haps_power(profile: &PowerProfile, rho: f64) -> Result<f64> {
    profile.active_power(rho)
}

/// Total network draw. Index 0 is the HAPS, which must be active.
pub fn network_power(active: &[bool], loads: &[f64], profiles: &[PowerProfile]) -> Result<f64> {
    debug_assert_eq!(active.len(), loads.len());
    debug_assert_eq!(active.len(), profiles.len());
    if !active.first().copied().unwrap_or(false) {
        return Err(Error::HapsInactive);
    }
    let mut terms = Vec::with_capacity(active.len() - 1);
    for k in 1..active.len() {
        if !active[k] && loads[k] > 0.0 {
            return Err(Error::LoadOnInactive(k));
        }
        terms.push(sc_power(&profiles[k], loads[k], active[k])?);
    }
    // summing in sorted order makes the total independent of which cells carry which load
    terms.sort_by(f64::total_cmp);
    Ok(terms.into_iter().fold(haps_power(&profiles[0], loads[0])?, |acc, t| acc + t))
}

/// Energy over one slot of `t_d` seconds.
pub fn slot_energy(power_w: f64, t_d: f64) -> f64 {
    power_w * t_d
}
