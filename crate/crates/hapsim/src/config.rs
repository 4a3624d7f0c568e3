//! `key = value` configuration files, overrides and sweep expansion.
//!
//! Every scenario parameter has exactly one key. Values are resolved in
//! order: built-in defaults, the config file, `HAPSIM_<KEY>` environment
//! variables, then `--set key=value` flags. Keys in [`LIST_KEYS`] may carry
//! a comma-separated list, which only the sweep expands.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use hapsim_core::association::FullCellRule;
use hapsim_core::propagation::Environment;
use hapsim_core::simulation::{LosMode, Mode, ScenarioConfig};
use thiserror::Error;

/// Keys a sweep may vary.
pub const LIST_KEYS: [&str; 4] = ["lambda", "mu", "mode", "seed"];

/// Prefix of environment variables that override config keys.
pub const ENV_PREFIX: &str = "HAPSIM_";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("`{0}` holds a list; list values are only expanded by `sweep`")]
    UnexpectedList(String),
    #[error("{path}:{line}: expected `key = value`")]
    Syntax { path: String, line: usize },
    #[error("malformed override `{0}`, expected key=value")]
    Override(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("cannot load tables from {path}: {source}")]
    Tables { path: String, source: hapsim_core::Error },
    #[error(transparent)]
    Invalid(#[from] hapsim_core::Error),
}

/// A resolved, single-valued configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub scenario: ScenarioConfig,
    /// Replacement table file; `None` uses the built-in tables.
    pub tables: Option<PathBuf>,
}

impl Default for Settings {
    fn default() -> Self {
        Self { scenario: ScenarioConfig::default(), tables: None }
    }
}

type Getter = fn(&Settings) -> String;
type Setter = fn(&mut Settings, &str) -> Result<(), String>;

struct Key {
    name: &'static str,
    get: Getter,
    set: Setter,
}

fn parse<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: Display,
{
    v.trim().parse::<T>().map_err(|e| e.to_string())
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

pub fn parse_mode(v: &str) -> Result<Mode, String> {
    match v.trim().to_ascii_lowercase().as_str() {
        "csa" => Ok(Mode::Csa),
        "a3" => Ok(Mode::A3),
        _ => Err("expected csa or a3".into()),
    }
}

pub fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Csa => "csa",
        Mode::A3 => "a3",
    }
}

macro_rules! key {
    ($name:literal, |$s:ident| $get:expr, |$t:ident, $v:ident| $set:expr) => {
        Key {
            name: $name,
            get: |$s: &Settings| $get.to_string(),
            set: |$t: &mut Settings, $v: &str| -> Result<(), String> {
                $set;
                Ok(())
            },
        }
    };
}

static KEYS: &[Key] = &[
    key!("area_width", |s| s.scenario.area.width, |s, v| s.scenario.area.width = parse(v)?),
    key!("area_height", |s| s.scenario.area.height, |s, v| s.scenario.area.height = parse(v)?),
    key!("n_ts", |s| s.scenario.n_ts, |s, v| s.scenario.n_ts = parse(v)?),
    key!("t_d", |s| s.scenario.t_d, |s, v| s.scenario.t_d = parse(v)?),
    key!("carrier_ghz", |s| s.scenario.carrier_ghz, |s, v| {
        let f: f64 = parse(v)?;
        s.scenario.carrier_ghz = f;
        s.scenario.haps_rf.carrier_ghz = f;
        s.scenario.sc_rf.carrier_ghz = f;
    }),
    key!("total_bandwidth", |s| s.scenario.total_bandwidth_hz, |s, v| s.scenario.total_bandwidth_hz = parse(v)?),
    key!("per_ue_bandwidth", |s| s.scenario.per_ue_bandwidth_hz, |s, v| s.scenario.per_ue_bandwidth_hz = parse(v)?),
    key!("lambda", |s| s.scenario.lambda, |s, v| s.scenario.lambda = parse(v)?),
    key!("mu", |s| s.scenario.mu, |s, v| s.scenario.mu = parse(v)?),
    key!("mode", |s| mode_name(s.scenario.mode), |s, v| s.scenario.mode = parse_mode(v)?),
    key!(
        "environment",
        |s| match s.scenario.environment {
            Environment::Urban => "urban",
            Environment::Rural => "rural",
        },
        |s, v| s.scenario.environment = match v.trim().to_ascii_lowercase().as_str() {
            "urban" => Environment::Urban,
            "rural" => Environment::Rural,
            _ => return Err("expected urban or rural".into()),
        }
    ),
    key!(
        "los_mode",
        |s| match s.scenario.los_mode {
            LosMode::Sampled => "sampled",
            LosMode::Blended => "blended",
        },
        |s, v| s.scenario.los_mode = match v.trim().to_ascii_lowercase().as_str() {
            "sampled" => LosMode::Sampled,
            "blended" => LosMode::Blended,
            _ => return Err("expected sampled or blended".into()),
        }
    ),
    key!("seed", |s| s.scenario.seed, |s, v| s.scenario.seed = parse(v)?),
    key!("haps_altitude", |s| s.scenario.haps_altitude, |s, v| s.scenario.haps_altitude = parse(v)?),
    key!("sc_height", |s| s.scenario.sc_height, |s, v| s.scenario.sc_height = parse(v)?),
    key!("ue_height", |s| s.scenario.ue_height, |s, v| s.scenario.ue_height = parse(v)?),
    key!("speed_pedestrian", |s| s.scenario.mobility.pedestrian_speed, |s, v| s.scenario.mobility.pedestrian_speed = parse(v)?),
    key!("speed_cycler", |s| s.scenario.mobility.cycler_speed, |s, v| s.scenario.mobility.cycler_speed = parse(v)?),
    key!("speed_vehicular", |s| s.scenario.mobility.vehicular_speed, |s, v| s.scenario.mobility.vehicular_speed = parse(v)?),
    key!("mix_stationary", |s| s.scenario.mobility.mode_mix[0], |s, v| s.scenario.mobility.mode_mix[0] = parse(v)?),
    key!("mix_pedestrian", |s| s.scenario.mobility.mode_mix[1], |s, v| s.scenario.mobility.mode_mix[1] = parse(v)?),
    key!("mix_cycler", |s| s.scenario.mobility.mode_mix[2], |s, v| s.scenario.mobility.mode_mix[2] = parse(v)?),
    key!("mix_vehicular", |s| s.scenario.mobility.mode_mix[3], |s, v| s.scenario.mobility.mode_mix[3] = parse(v)?),
    key!("heading_jitter", |s| s.scenario.mobility.heading_jitter, |s, v| s.scenario.mobility.heading_jitter = parse(v)?),
    key!("noise_density_dbm_hz", |s| s.scenario.noise_density_dbm_hz, |s, v| s.scenario.noise_density_dbm_hz = parse(v)?),
    key!("noise_figure_db", |s| s.scenario.noise_figure_db, |s, v| s.scenario.noise_figure_db = parse(v)?),
    key!("sensitivity_dbm", |s| s.scenario.sensitivity_dbm, |s, v| s.scenario.sensitivity_dbm = parse(v)?),
    key!("haps_tx_power_dbm", |s| s.scenario.haps_rf.tx_power_dbm, |s, v| s.scenario.haps_rf.tx_power_dbm = parse(v)?),
    key!("haps_tx_gain_dbi", |s| s.scenario.haps_rf.tx_gain_dbi, |s, v| s.scenario.haps_rf.tx_gain_dbi = parse(v)?),
    key!("sc_tx_power_dbm", |s| s.scenario.sc_rf.tx_power_dbm, |s, v| s.scenario.sc_rf.tx_power_dbm = parse(v)?),
    key!("sc_tx_gain_dbi", |s| s.scenario.sc_rf.tx_gain_dbi, |s, v| s.scenario.sc_rf.tx_gain_dbi = parse(v)?),
    key!("ue_rx_gain_dbi", |s| s.scenario.haps_rf.rx_gain_dbi, |s, v| {
        let g: f64 = parse(v)?;
        s.scenario.haps_rf.rx_gain_dbi = g;
        s.scenario.sc_rf.rx_gain_dbi = g;
    }),
    key!("haps_p_c", |s| s.scenario.haps_power.p_c, |s, v| s.scenario.haps_power.p_c = parse(v)?),
    key!("haps_slope", |s| s.scenario.haps_power.slope, |s, v| s.scenario.haps_power.slope = parse(v)?),
    key!("haps_p_max", |s| s.scenario.haps_power.p_max, |s, v| s.scenario.haps_power.p_max = parse(v)?),
    key!("sc_p_c", |s| s.scenario.sc_power.p_c, |s, v| s.scenario.sc_power.p_c = parse(v)?),
    key!("sc_slope", |s| s.scenario.sc_power.slope, |s, v| s.scenario.sc_power.slope = parse(v)?),
    key!("sc_p_max", |s| s.scenario.sc_power.p_max, |s, v| s.scenario.sc_power.p_max = parse(v)?),
    key!("sc_p_sleep", |s| s.scenario.sc_power.p_sleep, |s, v| s.scenario.sc_power.p_sleep = parse(v)?),
    key!("haps_sigma_los", |s| s.scenario.haps_shadow.los, |s, v| s.scenario.haps_shadow.los = parse(v)?),
    key!("haps_sigma_nlos", |s| s.scenario.haps_shadow.nlos, |s, v| s.scenario.haps_shadow.nlos = parse(v)?),
    key!("sc_sigma_los", |s| s.scenario.sc_shadow.los, |s, v| s.scenario.sc_shadow.los = parse(v)?),
    key!("sc_sigma_nlos", |s| s.scenario.sc_shadow.nlos, |s, v| s.scenario.sc_shadow.nlos = parse(v)?),
    key!(
        "full_cell_rule",
        |s| match s.scenario.full_cell_rule {
            FullCellRule::Cascade => "cascade",
            FullCellRule::Outage => "outage",
        },
        |s, v| s.scenario.full_cell_rule = match v.trim().to_ascii_lowercase().as_str() {
            "cascade" => FullCellRule::Cascade,
            "outage" => FullCellRule::Outage,
            _ => return Err("expected cascade or outage".into()),
        }
    ),
    key!("haps_load_includes_other", |s| s.scenario.haps_load_includes_other, |s, v| {
        s.scenario.haps_load_includes_other = parse_bool(v)?
    }),
    key!(
        "tables",
        |s| s.tables.as_ref().map_or_else(|| "builtin".to_string(), |p| p.display().to_string()),
        |s, v| s.tables = match v.trim() {
            "" | "builtin" => None,
            p => Some(PathBuf::from(p)),
        }
    ),
];

/// Every recognised key, in echo order.
pub fn key_names() -> impl Iterator<Item = &'static str> {
    KEYS.iter().map(|k| k.name)
}

fn find_key(name: &str) -> Result<&'static Key, ConfigError> {
    KEYS.iter().find(|k| k.name == name).ok_or_else(|| ConfigError::UnknownKey(name.to_string()))
}

/// Unresolved key → value assignments, possibly list-valued.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<&'static str, String>,
}

impl RawConfig {
    /// Sets `key` after checking that it exists.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let k = find_key(key.trim())?;
        self.values.insert(k.name, value.trim().to_string());
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        let (k, v) = assignment.split_once('=').ok_or_else(|| ConfigError::Override(assignment.to_string()))?;
        self.set(k, v)
    }

    /// Parses `key = value` lines; `#` starts a comment.
    pub fn parse_str(&mut self, text: &str, origin: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { path: origin.to_string(), line: i + 1 })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn load_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        self.parse_str(&text, &path.display().to_string())
    }

    /// Applies `HAPSIM_<KEY>` variables found through `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        for name in key_names() {
            if let Some(v) = lookup(&format!("{ENV_PREFIX}{}", name.to_ascii_uppercase())) {
                self.set(name, &v)?;
            }
        }
        Ok(())
    }

    fn list(&self, key: &str) -> Vec<String> {
        match self.values.get(key) {
            Some(v) => v.split(',').map(|s| s.trim().to_string()).collect(),
            None => vec![(find_key(key).expect("known key").get)(&Settings::default())],
        }
    }

    /// Resolves into one validated configuration; list values are rejected.
    pub fn resolve(&self) -> Result<Settings, ConfigError> {
        let mut s = Settings::default();
        for (name, value) in &self.values {
            if LIST_KEYS.contains(name) && value.contains(',') {
                return Err(ConfigError::UnexpectedList(name.to_string()));
            }
            apply(&mut s, name, value)?;
        }
        s.scenario.validate()?;
        Ok(s)
    }

    /// Expands list-valued sweep keys into the grid `lambda × mu × seed × mode`.
    pub fn expand(&self) -> Result<Vec<Settings>, ConfigError> {
        let lambdas = self.list("lambda");
        let mus = self.list("mu");
        let seeds = self.list("seed");
        let modes = self.list("mode");
        let mut grid = Vec::with_capacity(lambdas.len() * mus.len() * seeds.len() * modes.len());
        for l in &lambdas {
            for m in &mus {
                for seed in &seeds {
                    for mode in &modes {
                        let mut raw = self.clone();
                        raw.values.insert("lambda", l.clone());
                        raw.values.insert("mu", m.clone());
                        raw.values.insert("seed", seed.clone());
                        raw.values.insert("mode", mode.clone());
                        grid.push(raw.resolve()?);
                    }
                }
            }
        }
        Ok(grid)
    }
}

fn apply(s: &mut Settings, key: &str, value: &str) -> Result<(), ConfigError> {
    let k = find_key(key)?;
    (k.set)(s, value).map_err(|reason| ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason,
    })
}

/// Every key with its resolved value, in a fixed order.
pub fn to_pairs(s: &Settings) -> Vec<(&'static str, String)> {
    KEYS.iter().map(|k| (k.name, (k.get)(s))).collect()
}

/// Renders a resolved configuration as a config file.
pub fn to_text(s: &Settings) -> String {
    to_pairs(s).into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

/// Loads the tables named by `s.tables`, or the built-in ones.
pub fn load_tables(s: &Settings) -> Result<hapsim_core::propagation::NtnTables, ConfigError> {
    use hapsim_core::propagation::NtnTables;
    match &s.tables {
        None => Ok(NtnTables::default()),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
            NtnTables::parse(&text).map_err(|source| ConfigError::Tables { path: path.display().to_string(), source })
        }
    }
}
