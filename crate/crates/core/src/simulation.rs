//! Scenario construction and the seeded per-slot simulation loop.
//!
//! One run is sequential over slots: users move, every user-station link
//! gets a fresh LoS and shadowing draw, and then either the exhaustive
//! search (CSA) or the all-active baseline (A3) is evaluated on that frozen
//! slot. Both modes consume the random streams identically, so a CSA run
//! and an A3 run with the same seed see the same users and the same links.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::association::{haps_available_capacity, CapacityVector, FullCellRule, LinkTable};
use crate::geometry::{
    elevation_angle, step_mobility, terrestrial_distances, Area, MobilityMode, MobilityParams, MobilityState,
    Position, User,
};
use crate::power::{slot_energy, PowerProfile};
use crate::propagation::{
    blended_path_loss, los_probability_tn, received_power, Environment, LinkCondition, NtnTables, RfParams,
    ShadowSigmas, Tier, UmiStreetCanyon,
};
use crate::radio::{data_rate, noise_power, NoiseModel};
use crate::rng::{stream, Stream};
use crate::switching::{all_active_policy, evaluate_policy, exhaustive_search, Policy, PolicyEvaluation, SlotState};
use crate::{db_to_linear, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    /// Exhaustive-search cell switching.
    Csa,
    /// All small cells always on.
    A3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LosMode {
    /// One Bernoulli LoS draw per link and slot.
    #[default]
    Sampled,
    /// Probability-weighted mix of the LoS and NLoS losses.
    Blended,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub area: Area,
    pub n_ts: usize,
    pub t_d: f64,
    pub carrier_ghz: f64,
    pub total_bandwidth_hz: f64,
    pub per_ue_bandwidth_hz: f64,
    pub lambda: f64,
    pub mu: usize,
    pub mode: Mode,
    pub environment: Environment,
    pub los_mode: LosMode,
    pub seed: u64,
    pub haps_altitude: f64,
    pub sc_height: f64,
    pub ue_height: f64,
    pub mobility: MobilityParams,
    pub noise_density_dbm_hz: f64,
    pub noise_figure_db: f64,
    pub sensitivity_dbm: f64,
    pub haps_rf: RfParams,
    pub sc_rf: RfParams,
    pub haps_power: PowerProfile,
    pub sc_power: PowerProfile,
    pub haps_shadow: ShadowSigmas,
    pub sc_shadow: ShadowSigmas,
    pub full_cell_rule: FullCellRule,
    /// Count the capacity other networks occupy on the HAPS in its power draw.
    pub haps_load_includes_other: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            area: Area::new(500.0, 500.0),
            n_ts: 100,
            t_d: 1.0,
            carrier_ghz: 2.5,
            total_bandwidth_hz: 50e6,
            per_ue_bandwidth_hz: 200e3,
            lambda: 0.7,
            mu: 100,
            mode: Mode::Csa,
            environment: Environment::Urban,
            los_mode: LosMode::Sampled,
            seed: 42,
            haps_altitude: 20_000.0,
            sc_height: 10.0,
            ue_height: 1.5,
            mobility: MobilityParams::default(),
            noise_density_dbm_hz: -174.0,
            noise_figure_db: 7.0,
            sensitivity_dbm: -95.0,
            haps_rf: RfParams::haps(2.5),
            sc_rf: RfParams::small_cell(2.5),
            haps_power: PowerProfile::HAPS,
            sc_power: PowerProfile::SMALL_CELL,
            haps_shadow: ShadowSigmas::default(),
            sc_shadow: ShadowSigmas::default(),
            full_cell_rule: FullCellRule::Cascade,
            haps_load_includes_other: false,
        }
    }
}

fn invalid(key: &'static str, reason: &'static str) -> Error {
    Error::InvalidConfig { key, reason }
}

fn positive(key: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 { Ok(()) } else { Err(invalid(key, "must be a positive number")) }
}

fn non_negative(key: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 { Ok(()) } else { Err(invalid(key, "must be a non-negative number")) }
}

impl ScenarioConfig {
    /// Channels per station, `W / per-UE bandwidth`.
    pub fn channels_per_station(&self) -> usize {
        libm::round(self.total_bandwidth_hz / self.per_ue_bandwidth_hz) as usize
    }

    /// Users per square meter.
    pub fn gamma(&self) -> f64 {
        self.mu as f64 / self.area.square_meters()
    }

    pub fn noise_model(&self) -> NoiseModel {
        NoiseModel {
            density_dbm_hz: self.noise_density_dbm_hz,
            noise_figure_db: self.noise_figure_db,
            per_ue_bandwidth_hz: self.per_ue_bandwidth_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("area_width", self.area.width)?;
        positive("area_height", self.area.height)?;
        if self.n_ts < 1 {
            return Err(invalid("n_ts", "must be at least 1"));
        }
        positive("t_d", self.t_d)?;
        if !(self.carrier_ghz > 0.0 && self.carrier_ghz <= 6.0) {
            return Err(invalid("carrier_ghz", "must lie in (0, 6] GHz"));
        }
        positive("per_ue_bandwidth", self.per_ue_bandwidth_hz)?;
        positive("total_bandwidth", self.total_bandwidth_hz)?;
        let ratio = self.total_bandwidth_hz / self.per_ue_bandwidth_hz;
        if ratio < 1.0 || (ratio - libm::round(ratio)).abs() > 1e-9 * ratio {
            return Err(invalid("per_ue_bandwidth", "must divide total_bandwidth"));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(invalid("lambda", "must lie in [0, 1]"));
        }
        positive("haps_altitude", self.haps_altitude)?;
        non_negative("ue_height", self.ue_height)?;
        non_negative("sc_height", self.sc_height)?;
        if self.haps_altitude <= self.ue_height {
            return Err(invalid("haps_altitude", "must exceed ue_height"));
        }
        if self.sc_height <= 1.0 || self.ue_height <= 1.0 {
            // effective heights for the UMi breakpoint subtract 1 m
            return Err(invalid("sc_height", "mast and terminal heights must exceed 1 m"));
        }
        if (self.sc_height - self.ue_height).abs() < 1.0 {
            return Err(invalid("sc_height", "must differ from ue_height by at least 1 m"));
        }
        let m = &self.mobility;
        non_negative("speed_pedestrian", m.pedestrian_speed)?;
        non_negative("speed_cycler", m.cycler_speed)?;
        non_negative("speed_vehicular", m.vehicular_speed)?;
        non_negative("heading_jitter", m.heading_jitter)?;
        for (key, w) in ["mix_stationary", "mix_pedestrian", "mix_cycler", "mix_vehicular"].into_iter().zip(m.mode_mix) {
            non_negative(key, w)?;
        }
        if m.mode_mix.iter().sum::<f64>() <= 0.0 {
            return Err(invalid("mix_stationary", "mobility mode weights must not all be zero"));
        }
        for (key, p) in [("haps_power", &self.haps_power), ("sc_power", &self.sc_power)] {
            if !p.is_valid() {
                return Err(invalid(key, "power coefficients must be non-negative with sleep below constant power"));
            }
        }
        for (key, s) in [("haps_shadow", &self.haps_shadow), ("sc_shadow", &self.sc_shadow)] {
            non_negative(key, s.los)?;
            non_negative(key, s.nlos)?;
        }
        if !self.sensitivity_dbm.is_finite() {
            return Err(invalid("sensitivity_dbm", "must be finite"));
        }
        if !self.noise_density_dbm_hz.is_finite() || !self.noise_figure_db.is_finite() {
            return Err(invalid("noise_figure_db", "noise parameters must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation {
    pub tier: Tier,
    pub position: Position,
    pub rf: RfParams,
    pub power: PowerProfile,
    /// Channels this network may use on the station.
    pub capacity: usize,
}

/// Stations (index 0 = HAPS, then the four small cells) and users.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub stations: Vec<BaseStation>,
    pub users: Vec<User>,
}

/// Places the HAPS above the area center, one small cell at the centroid of
/// each quadrant, and `mu` users uniformly at random.
pub fn build_scenario(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let (w, h) = (config.area.width, config.area.height);
    let (cx, cy) = config.area.center();
    let c_t = config.channels_per_station();

    let mut stations = Vec::with_capacity(5);
    stations.push(BaseStation {
        tier: Tier::Haps,
        position: Position::new(cx, cy, config.haps_altitude),
        rf: config.haps_rf,
        power: config.haps_power,
        capacity: haps_available_capacity(config.lambda, c_t),
    });
    for (x, y) in [(w / 4.0, h / 4.0), (w / 4.0, 3.0 * h / 4.0), (3.0 * w / 4.0, h / 4.0), (3.0 * w / 4.0, 3.0 * h / 4.0)] {
        stations.push(BaseStation {
            tier: Tier::SmallCell,
            position: Position::new(x, y, config.sc_height),
            rf: config.sc_rf,
            power: config.sc_power,
            capacity: c_t,
        });
    }

    let mix = WeightedIndex::new(config.mobility.mode_mix).map_err(|_| invalid("mix_stationary", "bad weights"))?;
    let mut rng = stream(config.seed, Stream::Placement);
    let users = (0..config.mu)
        .map(|id| {
            let x = rng.random_range(0.0..=w);
            let y = rng.random_range(0.0..=h);
            let mode = MobilityMode::ALL[mix.sample(&mut rng)];
            let heading = rng.random_range(0.0..TAU);
            User {
                id,
                position: Position::new(x, y, config.ue_height),
                mobility: MobilityState::new(mode, config.mobility.speed(mode), heading),
            }
        })
        .collect();
    Ok(Scenario { stations, users })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotRecord {
    pub slot: usize,
    pub policy: Policy,
    pub loads: Vec<f64>,
    pub power_w: f64,
    pub energy_j: f64,
    /// Shannon rate of every served user, bit/s, in user order.
    pub rates: Vec<f64>,
    pub unserved: usize,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub config: ScenarioConfig,
    pub slots: Vec<SlotRecord>,
    pub total_energy_j: f64,
    pub mean_power_w: f64,
    /// Every rate sample of the run, ascending.
    pub rates_sorted: Vec<f64>,
    pub unserved_total: usize,
    pub infeasible_slots: usize,
    pub gamma: f64,
}

impl RunSummary {
    /// Fraction of slots whose policy switched every small cell off.
    pub fn all_off_fraction(&self) -> f64 {
        let n = self.slots.iter().filter(|s| s.policy.all_small_cells_off()).count();
        n as f64 / self.slots.len() as f64
    }
}

/// Per-slot link drawing with all random streams of a run.
#[derive(Debug)]
pub struct Simulator<'a> {
    config: &'a ScenarioConfig,
    tables: &'a NtnTables,
    scenario: Scenario,
    umi: UmiStreetCanyon,
    noise_mw: f64,
    mobility_rng: rand_chacha::ChaCha8Rng,
    los_rng: rand_chacha::ChaCha8Rng,
    shadow_rng: rand_chacha::ChaCha8Rng,
}

impl<'a> Simulator<'a> {
    pub fn new(config: &'a ScenarioConfig, tables: &'a NtnTables) -> Result<Self> {
        let scenario = build_scenario(config)?;
        Ok(Self {
            config,
            tables,
            scenario,
            umi: UmiStreetCanyon { bs_height: config.sc_height, ue_height: config.ue_height },
            noise_mw: db_to_linear(noise_power(&config.noise_model())),
            mobility_rng: stream(config.seed, Stream::Mobility),
            los_rng: stream(config.seed, Stream::LineOfSight),
            shadow_rng: stream(config.seed, Stream::Shadowing),
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    /// Moves every user by one slot.
    pub fn advance_mobility(&mut self) {
        let cfg = self.config;
        for user in &mut self.scenario.users {
            *user = step_mobility(user, cfg.t_d, &cfg.area, cfg.mobility.heading_jitter, &mut self.mobility_rng);
        }
    }

    /// Draws fresh link realizations and freezes them into a slot state.
    ///
    /// Every link consumes one uniform from the LoS stream and two standard
    /// normals from the shadowing stream regardless of `los_mode`.
    pub fn draw_slot(&mut self) -> Result<SlotState> {
        let cfg = self.config;
        let n_bs = self.scenario.stations.len();
        let mut rx = Vec::with_capacity(self.scenario.users.len() * n_bs);
        for user in &self.scenario.users {
            for bs in &self.scenario.stations {
                let u: f64 = self.los_rng.random();
                let z_los: f64 = StandardNormal.sample(&mut self.shadow_rng);
                let z_nlos: f64 = StandardNormal.sample(&mut self.shadow_rng);
                let pl = self.link_loss(user, bs, u, z_los, z_nlos)?;
                rx.push(received_power(&bs.rf, pl));
            }
        }
        let c_t = cfg.channels_per_station();
        let haps_cap = self.scenario.stations[0].capacity;
        let background = if cfg.haps_load_includes_other { (c_t - haps_cap) as f64 / c_t as f64 } else { 0.0 };
        Ok(SlotState {
            links: LinkTable::new(n_bs, rx),
            noise_mw: self.noise_mw,
            capacity: CapacityVector { remaining: self.scenario.stations.iter().map(|s| s.capacity).collect() },
            channels_total: alloc::vec![c_t; n_bs],
            sensitivity_dbm: cfg.sensitivity_dbm,
            profiles: self.scenario.stations.iter().map(|s| s.power).collect(),
            full_cell_rule: cfg.full_cell_rule,
            haps_background_load: background,
        })
    }

    fn link_loss(&self, user: &User, bs: &BaseStation, u: f64, z_los: f64, z_nlos: f64) -> Result<f64> {
        let cfg = self.config;
        let f = cfg.carrier_ghz;
        match bs.tier {
            Tier::Haps => {
                let theta = elevation_angle(&user.position, &bs.position);
                let p = self.tables.los_probability(theta, cfg.environment);
                let s = cfg.haps_shadow;
                let loss = |cond| self.tables.path_loss(cfg.environment, theta, cfg.haps_altitude, cond, f);
                match cfg.los_mode {
                    LosMode::Sampled => {
                        let los = u < p;
                        loss(LinkCondition { los, shadow_db: if los { z_los * s.los } else { z_nlos * s.nlos } })
                    }
                    LosMode::Blended => Ok(blended_path_loss(
                        p,
                        loss(LinkCondition::los(z_los * s.los))?,
                        loss(LinkCondition::nlos(z_nlos * s.nlos))?,
                    )),
                }
            }
            Tier::SmallCell => {
                let (d2, d3) = terrestrial_distances(&user.position, &bs.position);
                let p = los_probability_tn(d2);
                let s = cfg.sc_shadow;
                let loss = |cond| self.umi.path_loss(d2, d3, cond, f);
                match cfg.los_mode {
                    LosMode::Sampled => {
                        let los = u < p;
                        loss(LinkCondition { los, shadow_db: if los { z_los * s.los } else { z_nlos * s.nlos } })
                    }
                    LosMode::Blended => Ok(blended_path_loss(
                        p,
                        loss(LinkCondition::los(z_los * s.los))?,
                        loss(LinkCondition::nlos(z_nlos * s.nlos))?,
                    )),
                }
            }
        }
    }

    /// Runs the configured decision rule on a frozen slot.
    pub fn decide(&self, state: &SlotState) -> Result<PolicyEvaluation> {
        match self.config.mode {
            Mode::Csa => exhaustive_search(state),
            Mode::A3 => evaluate_policy(&all_active_policy(self.scenario.stations.len() - 1), state),
        }
    }
}

/// Executes one configuration end to end.
pub fn run(config: &ScenarioConfig, tables: &NtnTables) -> Result<RunSummary> {
    let mut sim = Simulator::new(config, tables)?;
    let mut slots = Vec::with_capacity(config.n_ts);
    for slot in 0..config.n_ts {
        sim.advance_mobility();
        let state = sim.draw_slot()?;
        let eval = sim.decide(&state)?;
        let rates = eval.association.sinr.iter().flatten().map(|s| data_rate(*s, config.per_ue_bandwidth_hz)).collect();
        slots.push(SlotRecord {
            slot,
            policy: eval.policy,
            loads: eval.loads,
            power_w: eval.total_power_w,
            energy_j: slot_energy(eval.total_power_w, config.t_d),
            rates,
            unserved: eval.unserved_count,
            feasible: eval.feasible,
        });
    }
    Ok(summarize(config.clone(), slots))
}

fn summarize(config: ScenarioConfig, slots: Vec<SlotRecord>) -> RunSummary {
    let total_energy_j: f64 = slots.iter().map(|s| s.energy_j).sum();
    let mean_power_w = slots.iter().map(|s| s.power_w).sum::<f64>() / slots.len() as f64;
    let mut rates_sorted: Vec<f64> = slots.iter().flat_map(|s| s.rates.iter().copied()).collect();
    rates_sorted.sort_by(f64::total_cmp);
    RunSummary {
        gamma: config.gamma(),
        unserved_total: slots.iter().map(|s| s.unserved).sum(),
        infeasible_slots: slots.iter().filter(|s| !s.feasible).count(),
        config,
        slots,
        total_energy_j,
        mean_power_w,
        rates_sorted,
    }
}
