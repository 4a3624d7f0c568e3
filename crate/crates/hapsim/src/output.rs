//! Result files: `energy.csv`, one `rates_<mode>_<lambda>_<mu>.csv` per
//! operating point and `summary.json`.
//!
//! Floats are written with Rust's shortest round-trip formatting, so parsing
//! a file back yields the exact values that were computed.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use hapsim_core::reporting::{cdf_of_sorted, gain, mean, median_of_sorted};
use hapsim_core::simulation::{Mode, RunSummary};
use serde::Serialize;

use crate::config::{mode_name, to_pairs};
use crate::sweep::{paired_gains, RunOutcome};

pub const ENERGY_HEADER: &str =
    "mode,lambda,mu,seed,gamma,total_energy_j,mean_power_w,gain_pct,all_off_fraction,infeasible_slots,unserved_total";
pub const RATES_HEADER: &str = "rate_bps,cdf";

#[derive(Serialize)]
struct RunEntry {
    config: BTreeMap<&'static str, String>,
    ok: bool,
    error: Option<String>,
    total_energy_j: Option<f64>,
    mean_power_w: Option<f64>,
    gain_pct: Option<f64>,
    all_off_fraction: Option<f64>,
    median_rate_bps: Option<f64>,
    infeasible_slots: Option<usize>,
    unserved_total: Option<usize>,
}

#[derive(Serialize)]
struct Aggregate {
    lambda: f64,
    mu: usize,
    paired_seeds: usize,
    /// Mean of the per-seed gains.
    mean_gain_pct: Option<f64>,
    /// Gain of the mean energies.
    gain_of_mean_energy_pct: Option<f64>,
    mean_energy_csa_j: Option<f64>,
    mean_energy_a3_j: Option<f64>,
    median_rate_csa_bps: Option<f64>,
    median_rate_a3_bps: Option<f64>,
    all_off_fraction_csa: Option<f64>,
}

#[derive(Serialize)]
struct Summary {
    runs: Vec<RunEntry>,
    aggregates: Vec<Aggregate>,
    failures: usize,
}

/// Operating point: mode, load level and user count.
type Point = (Mode, u64, usize);

fn point(o: &RunOutcome) -> Point {
    let c = &o.settings.scenario;
    (c.mode, c.lambda.to_bits(), c.mu)
}

pub fn rates_file_name(mode: Mode, lambda: f64, mu: usize) -> String {
    format!("rates_{}_{lambda}_{mu}.csv", mode_name(mode))
}

fn opt(v: Option<f64>) -> String {
    v.map(|g| g.to_string()).unwrap_or_default()
}

/// Energy table, one row per successful run in grid order.
pub fn energy_csv(outcomes: &[RunOutcome]) -> String {
    let gains = paired_gains(outcomes);
    let mut out = String::from(ENERGY_HEADER);
    out.push('\n');
    for (o, g) in outcomes.iter().zip(&gains) {
        let Ok(r) = &o.result else { continue };
        let c = &o.settings.scenario;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            mode_name(c.mode),
            c.lambda,
            c.mu,
            c.seed,
            r.gamma,
            r.total_energy_j,
            r.mean_power_w,
            opt(*g),
            r.all_off_fraction(),
            r.infeasible_slots,
            r.unserved_total
        );
    }
    out
}

/// Rate samples pooled over every successful run of each operating point.
fn pooled_rates(outcomes: &[RunOutcome]) -> Vec<(Point, Vec<f64>)> {
    let mut pools: Vec<(Point, Vec<f64>)> = Vec::new();
    for o in outcomes {
        let Ok(r) = &o.result else { continue };
        let p = point(o);
        match pools.iter_mut().find(|(q, _)| *q == p) {
            Some((_, v)) => v.extend_from_slice(&r.rates_sorted),
            None => pools.push((p, r.rates_sorted.clone())),
        }
    }
    for (_, v) in &mut pools {
        v.sort_by(f64::total_cmp);
    }
    pools
}

pub fn rates_csv(sorted: &[f64]) -> String {
    let mut out = String::from(RATES_HEADER);
    out.push('\n');
    for (r, f) in cdf_of_sorted(sorted) {
        let _ = writeln!(out, "{r},{f}");
    }
    out
}

fn aggregates(outcomes: &[RunOutcome], pools: &[(Point, Vec<f64>)]) -> Vec<Aggregate> {
    let gains = paired_gains(outcomes);
    let mut keys: Vec<(u64, usize)> = Vec::new();
    for o in outcomes {
        let (_, l, m) = point(o);
        if !keys.contains(&(l, m)) {
            keys.push((l, m));
        }
    }
    keys.into_iter()
        .map(|(l, mu)| {
            let of_mode = |mode: Mode| {
                outcomes
                    .iter()
                    .zip(&gains)
                    .filter(move |(o, _)| point(o) == (mode, l, mu))
                    .filter_map(|(o, g)| o.result.as_ref().ok().map(|r| (r, *g)))
            };
            let energies = |mode: Mode| mean(&of_mode(mode).map(|(r, _)| r.total_energy_j).collect::<Vec<_>>());
            let seed_gains: Vec<f64> = of_mode(Mode::Csa).filter_map(|(_, g)| g).collect();
            let median = |mode: Mode| {
                pools.iter().find(|(p, _)| *p == (mode, l, mu)).and_then(|(_, v)| median_of_sorted(v))
            };
            let (e_csa, e_a3) = (energies(Mode::Csa), energies(Mode::A3));
            Aggregate {
                lambda: f64::from_bits(l),
                mu,
                paired_seeds: seed_gains.len(),
                mean_gain_pct: mean(&seed_gains),
                gain_of_mean_energy_pct: e_a3.zip(e_csa).and_then(|(a, c)| gain(a, c).ok()),
                mean_energy_csa_j: e_csa,
                mean_energy_a3_j: e_a3,
                median_rate_csa_bps: median(Mode::Csa),
                median_rate_a3_bps: median(Mode::A3),
                all_off_fraction_csa: mean(
                    &of_mode(Mode::Csa).map(|(r, _)| RunSummary::all_off_fraction(r)).collect::<Vec<_>>(),
                ),
            }
        })
        .collect()
}

pub fn summary_json(outcomes: &[RunOutcome]) -> String {
    let gains = paired_gains(outcomes);
    let pools = pooled_rates(outcomes);
    let runs = outcomes
        .iter()
        .zip(&gains)
        .map(|(o, g)| {
            let config = to_pairs(&o.settings).into_iter().collect();
            match &o.result {
                Ok(r) => RunEntry {
                    config,
                    ok: true,
                    error: None,
                    total_energy_j: Some(r.total_energy_j),
                    mean_power_w: Some(r.mean_power_w),
                    gain_pct: *g,
                    all_off_fraction: Some(r.all_off_fraction()),
                    median_rate_bps: median_of_sorted(&r.rates_sorted),
                    infeasible_slots: Some(r.infeasible_slots),
                    unserved_total: Some(r.unserved_total),
                },
                Err(e) => RunEntry {
                    config,
                    ok: false,
                    error: Some(e.clone()),
                    total_energy_j: None,
                    mean_power_w: None,
                    gain_pct: None,
                    all_off_fraction: None,
                    median_rate_bps: None,
                    infeasible_slots: None,
                    unserved_total: None,
                },
            }
        })
        .collect();
    let summary = Summary {
        runs,
        aggregates: aggregates(outcomes, &pools),
        failures: outcomes.iter().filter(|o| o.result.is_err()).count(),
    };
    let mut s = serde_json::to_string_pretty(&summary).expect("summary serializes");
    s.push('\n');
    s
}

/// Writes every result file into `dir`, creating it if needed.
pub fn write_results(dir: &Path, outcomes: &[RunOutcome]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("energy.csv"), energy_csv(outcomes))?;
    for ((mode, l, mu), rates) in pooled_rates(outcomes) {
        fs::write(dir.join(rates_file_name(mode, f64::from_bits(l), mu)), rates_csv(&rates))?;
    }
    fs::write(dir.join("summary.json"), summary_json(outcomes))
}
