//! Parallel execution of configuration grids.

use hapsim_core::reporting::gain;
use hapsim_core::simulation::{run, Mode, RunSummary, ScenarioConfig};
use rayon::prelude::*;

use crate::config::{load_tables, mode_name, ConfigError, Settings};

/// Load levels of the reference grid.
pub const PAPER_LAMBDAS: [f64; 3] = [0.7, 0.5, 0.2];
/// User counts of the reference grid.
pub const PAPER_MUS: [usize; 4] = [100, 500, 700, 1000];

/// One grid point and what became of it.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub settings: Settings,
    pub result: Result<RunSummary, String>,
}

pub fn run_one(settings: &Settings) -> Result<RunSummary, ConfigError> {
    let tables = load_tables(settings)?;
    Ok(run(&settings.scenario, &tables)?)
}

/// Runs every grid point on a pool of `workers` threads (all cores when `None`).
///
/// Results come back in grid order whatever the scheduling. A failing point
/// is recorded in its outcome and does not stop the others.
pub fn run_sweep(grid: Vec<Settings>, workers: Option<usize>, progress: bool) -> Vec<RunOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .expect("thread pool");
    let total = grid.len();
    pool.install(|| {
        grid.into_par_iter()
            .enumerate()
            .map(|(i, settings)| {
                let result = run_one(&settings).map_err(|e| e.to_string());
                if progress {
                    let c = &settings.scenario;
                    let tail = match &result {
                        Ok(r) => format!("energy {} J", r.total_energy_j),
                        Err(e) => format!("failed: {e}"),
                    };
                    eprintln!(
                        "[{}/{total}] mode={} lambda={} mu={} seed={} {tail}",
                        i + 1,
                        mode_name(c.mode),
                        c.lambda,
                        c.mu,
                        c.seed
                    );
                }
                RunOutcome { settings, result }
            })
            .collect()
    })
}

fn is_counterpart(a: &Settings, b: &Settings) -> bool {
    if a.scenario.mode == b.scenario.mode || a.tables != b.tables {
        return false;
    }
    let mut other = b.scenario.clone();
    other.mode = a.scenario.mode;
    other == a.scenario
}

/// Energy gain of each successful run against its counterpart in the other mode.
///
/// Both runs of a pair get the same value. Runs without a successful
/// counterpart get `None`.
pub fn paired_gains(outcomes: &[RunOutcome]) -> Vec<Option<f64>> {
    outcomes
        .iter()
        .map(|o| {
            let mine = o.result.as_ref().ok()?;
            let theirs = outcomes
                .iter()
                .filter(|p| is_counterpart(&o.settings, &p.settings))
                .find_map(|p| p.result.as_ref().ok())?;
            let (a3, csa) = match o.settings.scenario.mode {
                Mode::Csa => (theirs, mine),
                Mode::A3 => (mine, theirs),
            };
            gain(a3.total_energy_j, csa.total_energy_j).ok()
        })
        .collect()
}

/// The reference grid: every load level and user count in both modes for
/// `n_seeds` consecutive seeds starting at `seed`, all other parameters at
/// their defaults.
pub fn paper_grid(seed: u64, n_seeds: usize) -> Vec<Settings> {
    let mut grid = Vec::with_capacity(PAPER_LAMBDAS.len() * PAPER_MUS.len() * n_seeds * 2);
    for &lambda in &PAPER_LAMBDAS {
        for &mu in &PAPER_MUS {
            for s in 0..n_seeds as u64 {
                for mode in [Mode::Csa, Mode::A3] {
                    grid.push(Settings {
                        scenario: ScenarioConfig { lambda, mu, mode, seed: seed + s, ..ScenarioConfig::default() },
                        tables: None,
                    });
                }
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(mode: Mode, seed: u64) -> Settings {
        Settings {
            scenario: ScenarioConfig { mu: 20, n_ts: 3, mode, seed, ..ScenarioConfig::default() },
            tables: None,
        }
    }

    #[test]
    fn order_is_preserved_and_parallelism_is_transparent() {
        let grid: Vec<_> = (0..6).map(|s| small(if s % 2 == 0 { Mode::Csa } else { Mode::A3 }, s / 2)).collect();
        let serial = run_sweep(grid.clone(), Some(1), false);
        let parallel = run_sweep(grid.clone(), Some(4), false);
        for ((a, b), g) in serial.iter().zip(&parallel).zip(&grid) {
            assert_eq!(&a.settings, g);
            assert_eq!(a.result, b.result);
        }
    }

    #[test]
    fn failures_do_not_abort() {
        let mut bad = small(Mode::Csa, 1);
        bad.tables = Some("/nonexistent/tables.txt".into());
        let out = run_sweep(vec![bad, small(Mode::A3, 1)], Some(2), false);
        assert!(out[0].result.as_ref().unwrap_err().contains("/nonexistent/tables.txt"));
        assert!(out[1].result.is_ok());
        assert_eq!(paired_gains(&out), vec![None, None]);
    }

    #[test]
    fn pairs_by_seed() {
        let out = run_sweep(vec![small(Mode::Csa, 1), small(Mode::A3, 2), small(Mode::A3, 1)], None, false);
        let g = paired_gains(&out);
        assert!(g[0].is_some());
        assert_eq!(g[1], None);
        assert_eq!(g[0], g[2]);
        let e = |i: usize| out[i].result.as_ref().unwrap().total_energy_j;
        assert_eq!(g[0].unwrap(), gain(e(2), e(0)).unwrap());
    }

    #[test]
    fn paper_grid_shape() {
        let g = paper_grid(42, 2);
        assert_eq!(g.len(), 3 * 4 * 2 * 2);
        assert!(g.iter().all(|s| s.scenario.n_ts == 100 && s.scenario.t_d == 1.0));
        assert_eq!(g[0].scenario.seed, 42);
        assert_eq!(g[3].scenario.seed, 43);
        assert_eq!(g[1].scenario.mode, Mode::A3);
        assert!(g.iter().all(|s| s.scenario.validate().is_ok()));
    }
}
