//! LoS/NLoS draws and the path-loss chains for both tiers.
//!
//! HAPS links follow the satellite/HAPS channel model: free-space loss over
//! the slant range, elevation-dependent clutter loss for NLoS links,
//! log-normal shadowing and ionospheric scintillation. Gas absorption and
//! building entry loss are zero (sub-6 GHz carrier, outdoor users).
//! Terrestrial links follow the UMi street-canyon model.

use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{slant_distance, EARTH_RADIUS_M};
use crate::{Error, Result};

/// Source of the default HAPS tables (LoS probability and NLoS clutter loss, S-band).
pub const NTN_TABLES_V1: &str = include_str!("../data/ntn_tables_v1.txt");

/// Peak-to-peak ionospheric fluctuation at 4 GHz, dB.
pub const PEAK_FLUCTUATION_4GHZ_DB: f64 = 1.1;

const SPEED_OF_LIGHT: f64 = 3.0e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Environment {
    #[default]
    Urban,
    Rural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tier {
    Haps,
    SmallCell,
}

/// One realization of a link's propagation state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkCondition {
    pub los: bool,
    pub shadow_db: f64,
}

impl LinkCondition {
    pub const fn los(shadow_db: f64) -> Self {
        Self { los: true, shadow_db }
    }

    pub const fn nlos(shadow_db: f64) -> Self {
        Self { los: false, shadow_db }
    }
}

/// Shadow-fading standard deviations, dB.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadowSigmas {
    pub los: f64,
    pub nlos: f64,
}

impl ShadowSigmas {
    pub fn for_state(&self, los: bool) -> f64 {
        if los { self.los } else { self.nlos }
    }
}

impl Default for ShadowSigmas {
    fn default() -> Self {
        Self { los: 4.0, nlos: 6.0 }
    }
}

/// Link-budget parameters of one transmitter/receiver pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfParams {
    pub tx_power_dbm: f64,
    pub tx_gain_dbi: f64,
    pub rx_gain_dbi: f64,
    pub carrier_ghz: f64,
}

impl RfParams {
    pub const fn haps(carrier_ghz: f64) -> Self {
        Self { tx_power_dbm: 49.0, tx_gain_dbi: 43.2, rx_gain_dbi: 0.0, carrier_ghz }
    }

    pub const fn small_cell(carrier_ghz: f64) -> Self {
        Self { tx_power_dbm: 33.0, tx_gain_dbi: 4.0, rx_gain_dbi: 0.0, carrier_ghz }
    }
}

/// Piecewise-linear function of elevation angle in degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationTable {
    points: Vec<(f64, f64)>,
}

impl ElevationTable {
    /// Builds a table from `(angle, value)` points with strictly increasing angles.
    pub fn new(points: Vec<(f64, f64)>) -> Option<Self> {
        if points.is_empty() || points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return None;
        }
        Some(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Linear interpolation, clamped to the first/last point outside the table.
    pub fn interpolate(&self, angle: f64) -> f64 {
        let pts = &self.points;
        let (first, last) = (pts[0], pts[pts.len() - 1]);
        if !(angle > first.0) {
            return first.1;
        }
        if angle >= last.0 {
            return last.1;
        }
        let i = pts.partition_point(|p| p.0 <= angle);
        let (a0, v0) = pts[i - 1];
        let (a1, v1) = pts[i];
        v0 + (v1 - v0) * (angle - a0) / (a1 - a0)
    }
}

/// Elevation-indexed HAPS tables for every supported environment.
#[derive(Debug, Clone, PartialEq)]
pub struct NtnTables {
    pub los_urban: ElevationTable,
    pub los_rural: ElevationTable,
    pub clutter_urban: ElevationTable,
    pub clutter_rural: ElevationTable,
}

impl Default for NtnTables {
    fn default() -> Self {
        Self::parse(NTN_TABLES_V1).expect("embedded table data is well formed")
    }
}

impl NtnTables {
    /// Parses the sectioned table format.
    ///
    /// `#` starts a comment, `[name]` opens a section and every other
    /// non-blank line is `angle value`. The sections
    /// `los_probability.{urban,rural}` and `clutter_loss_nlos_db.{urban,rural}`
    /// must all be present.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: [(&str, Vec<(f64, f64)>, usize); 4] = [
            ("los_probability.urban", Vec::new(), 0),
            ("los_probability.rural", Vec::new(), 0),
            ("clutter_loss_nlos_db.urban", Vec::new(), 0),
            ("clutter_loss_nlos_db.rural", Vec::new(), 0),
        ];
        let mut current: Option<usize> = None;

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let slot = sections
                    .iter()
                    .position(|s| s.0 == name.trim())
                    .ok_or(Error::TableParse { line: line_no, reason: "unknown section" })?;
                if sections[slot].2 != 0 {
                    return Err(Error::TableParse { line: line_no, reason: "duplicate section" });
                }
                sections[slot].2 = line_no;
                current = Some(slot);
                continue;
            }
            let slot = current.ok_or(Error::TableParse { line: line_no, reason: "record outside a section" })?;
            let mut fields = line.split_whitespace();
            let angle = parse_field(fields.next(), line_no)?;
            let value = parse_field(fields.next(), line_no)?;
            if fields.next().is_some() {
                return Err(Error::TableParse { line: line_no, reason: "expected two fields" });
            }
            if !(0.0..=90.0).contains(&angle) {
                return Err(Error::TableParse { line: line_no, reason: "angle outside [0, 90]" });
            }
            if slot < 2 && !(0.0..=1.0).contains(&value) {
                return Err(Error::TableParse { line: line_no, reason: "probability outside [0, 1]" });
            }
            if slot >= 2 && value < 0.0 {
                return Err(Error::TableParse { line: line_no, reason: "negative clutter loss" });
            }
            sections[slot].1.push((angle, value));
        }

        let mut tables = sections.into_iter().map(|(_, pts, header)| {
            ElevationTable::new(pts).ok_or(Error::TableParse {
                line: header,
                reason: "section missing, empty or not strictly increasing in angle",
            })
        });
        let mut next = || tables.next().expect("four sections");
        Ok(Self { los_urban: next()?, los_rural: next()?, clutter_urban: next()?, clutter_rural: next()? })
    }

    /// Serializes back into the sectioned text format.
    pub fn to_text(&self) -> String {
        use core::fmt::Write;
        let mut out = String::from("# HAPS/satellite link tables, S-band\n");
        for (name, table) in [
            ("los_probability.urban", &self.los_urban),
            ("los_probability.rural", &self.los_rural),
            ("clutter_loss_nlos_db.urban", &self.clutter_urban),
            ("clutter_loss_nlos_db.rural", &self.clutter_rural),
        ] {
            let _ = writeln!(out, "\n[{name}]");
            for (a, v) in table.points() {
                let _ = writeln!(out, "{a} {v}");
            }
        }
        out
    }

    /// HAPS LoS probability; the elevation is clamped into `[10°, 90°]`.
    pub fn los_probability(&self, theta_deg: f64, env: Environment) -> f64 {
        let table = match env {
            Environment::Urban => &self.los_urban,
            Environment::Rural => &self.los_rural,
        };
        table.interpolate(theta_deg.clamp(10.0, 90.0)).clamp(0.0, 1.0)
    }

    /// Clutter loss in dB: zero for LoS, table-driven for NLoS.
    pub fn clutter_loss(&self, theta_deg: f64, los: bool, env: Environment) -> f64 {
        if los {
            return 0.0;
        }
        let table = match env {
            Environment::Urban => &self.clutter_urban,
            Environment::Rural => &self.clutter_rural,
        };
        table.interpolate(theta_deg.clamp(10.0, 90.0))
    }

    /// Basic plus scintillation loss of a HAPS link at elevation `theta_deg`.
    pub fn path_loss(
        &self,
        env: Environment,
        theta_deg: f64,
        altitude: f64,
        cond: LinkCondition,
        carrier_ghz: f64,
    ) -> Result<f64> {
        let d3 = slant_distance(theta_deg, altitude, EARTH_RADIUS_M)?;
        Ok(fspl(d3, carrier_ghz)?
            + self.clutter_loss(theta_deg, cond.los, env)
            + cond.shadow_db
            + scintillation_loss(carrier_ghz)?)
    }
}

fn parse_field(field: Option<&str>, line: usize) -> Result<f64> {
    let f = field.ok_or(Error::TableParse { line, reason: "expected two fields" })?;
    f.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or(Error::TableParse { line, reason: "not a decimal number" })
}

/// UMi street-canyon LoS probability for a horizontal distance in meters.
pub fn los_probability_tn(d_2d: f64) -> f64 {
    if d_2d <= 18.0 {
        return 1.0;
    }
    let r = 18.0 / d_2d;
    r + libm::exp(-d_2d / 36.0) * (1.0 - r)
}

/// Free-space path loss in dB for `d` meters and carrier `f_ghz`.
pub fn fspl(d: f64, f_ghz: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::NonPositiveDistance(d));
    }
    if !(f_ghz > 0.0) {
        return Err(Error::FrequencyOutOfRange(f_ghz));
    }
    Ok(32.45 + 20.0 * libm::log10(f_ghz) + 20.0 * libm::log10(d))
}

/// Ionospheric scintillation loss (peak-to-peak fluctuation over √2), sub-6 GHz only.
pub fn scintillation_loss(f_ghz: f64) -> Result<f64> {
    if !(f_ghz > 0.0 && f_ghz <= 6.0) {
        return Err(Error::FrequencyOutOfRange(f_ghz));
    }
    let pf = PEAK_FLUCTUATION_4GHZ_DB * libm::pow(f_ghz / 4.0, -1.5);
    Ok(pf / core::f64::consts::SQRT_2)
}

/// Antenna heights entering the UMi street-canyon formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UmiStreetCanyon {
    pub bs_height: f64,
    pub ue_height: f64,
}

impl Default for UmiStreetCanyon {
    fn default() -> Self {
        Self { bs_height: 10.0, ue_height: 1.5 }
    }
}

impl UmiStreetCanyon {
    /// Breakpoint distance computed with effective heights (1 m environment height).
    pub fn breakpoint(&self, carrier_ghz: f64) -> f64 {
        4.0 * (self.bs_height - 1.0) * (self.ue_height - 1.0) * carrier_ghz * 1e9 / SPEED_OF_LIGHT
    }

    /// Deterministic LoS loss.
    pub fn los_loss(&self, d_2d: f64, d_3d: f64, carrier_ghz: f64) -> f64 {
        let fc = 20.0 * libm::log10(carrier_ghz);
        let bp = self.breakpoint(carrier_ghz);
        if d_2d <= bp {
            32.4 + 21.0 * libm::log10(d_3d) + fc
        } else {
            let dh = self.bs_height - self.ue_height;
            32.4 + 40.0 * libm::log10(d_3d) + fc - 9.5 * libm::log10(bp * bp + dh * dh)
        }
    }

    /// Deterministic NLoS loss, never below the LoS loss at the same point.
    pub fn nlos_loss(&self, d_2d: f64, d_3d: f64, carrier_ghz: f64) -> f64 {
        let nlos = 35.3 * libm::log10(d_3d) + 22.4 + 21.3 * libm::log10(carrier_ghz)
            - 0.3 * (self.ue_height - 1.5);
        nlos.max(self.los_loss(d_2d, d_3d, carrier_ghz))
    }

    /// Terrestrial path loss including the shadowing realization.
    pub fn path_loss(&self, d_2d: f64, d_3d: f64, cond: LinkCondition, carrier_ghz: f64) -> Result<f64> {
        if !(d_3d >= 1.0) {
            return Err(Error::DistanceBelowModel(d_3d));
        }
        let det = if cond.los {
            self.los_loss(d_2d, d_3d, carrier_ghz)
        } else {
            self.nlos_loss(d_2d, d_3d, carrier_ghz)
        };
        Ok(det + cond.shadow_db)
    }
}

/// Terrestrial path loss with the default 10 m mast and 1.5 m terminal heights.
pub fn path_loss_tn(d_2d: f64, d_3d: f64, cond: LinkCondition, carrier_ghz: f64) -> Result<f64> {
    UmiStreetCanyon::default().path_loss(d_2d, d_3d, cond, carrier_ghz)
}

/// Probability-weighted combination of the LoS and NLoS path losses.
pub fn blended_path_loss(p_los: f64, pl_los: f64, pl_nlos: f64) -> f64 {
    p_los * pl_los + (1.0 - p_los) * pl_nlos
}

/// Link budget: `P_TX + G_TX − PL + G_RX`, all in the dB domain.
pub fn received_power(rf: &RfParams, path_loss_db: f64) -> f64 {
    rf.tx_power_dbm + rf.tx_gain_dbi - path_loss_db + rf.rx_gain_dbi
}

/// Bernoulli LoS draw.
pub fn draw_los<R: Rng + ?Sized>(p_los: f64, rng: &mut R) -> bool {
    rng.random::<f64>() < p_los
}

/// Zero-mean Gaussian shadowing sample with standard deviation `sigma_db`.
pub fn draw_shadow<R: Rng + ?Sized>(sigma_db: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    z * sigma_db
}

/// Draws a LoS state with probability `p_los`, then a shadowing value whose
/// spread follows that state.
pub fn sample_link_condition<R: Rng + ?Sized>(p_los: f64, sigmas: ShadowSigmas, rng: &mut R) -> LinkCondition {
    let los = draw_los(p_los, rng);
    LinkCondition { los, shadow_db: draw_shadow(sigmas.for_state(los), rng) }
}
