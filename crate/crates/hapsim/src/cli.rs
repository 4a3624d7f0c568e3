//! Command-line front end.

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::config::{to_text, RawConfig, Settings};
use crate::output::write_results;
use crate::sweep::{paper_grid, run_sweep, RunOutcome};

#[derive(Debug, Parser)]
#[command(name = "hapsim", version, about = "HAPS-assisted cell switching simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario.
    Run(RunArgs),
    /// Run the grid spanned by list-valued lambda, mu, mode and seed.
    Sweep(RunArgs),
    /// Run the reference grid in both modes.
    ReproducePaper(PaperArgs),
    /// Resolve and check a configuration, then print it.
    ValidateConfig(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    /// `key = value` configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override a key; repeatable, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PaperArgs {
    /// First seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Consecutive seeds per grid point.
    #[arg(long, default_value_t = 1)]
    pub seeds: usize,
    #[arg(long, default_value = "results")]
    pub out: PathBuf,
    #[arg(long)]
    pub workers: Option<usize>,
}

impl ConfigArgs {
    /// Defaults < file < `HAPSIM_*` environment < `--seed` < `--set`.
    pub fn raw(&self) -> Result<RawConfig> {
        let mut raw = RawConfig::default();
        if let Some(path) = &self.config {
            raw.load_file(path)?;
        }
        raw.apply_env(|k| std::env::var(k).ok())?;
        if let Some(seed) = self.seed {
            raw.set("seed", &seed.to_string())?;
        }
        for s in &self.set {
            raw.set_override(s)?;
        }
        Ok(raw)
    }

    pub fn resolve(&self) -> Result<Settings> {
        Ok(self.raw()?.resolve()?)
    }
}

fn finish(out: &std::path::Path, outcomes: &[RunOutcome]) -> Result<()> {
    write_results(out, outcomes).with_context(|| format!("writing results to {}", out.display()))?;
    let failed: Vec<_> = outcomes.iter().filter_map(|o| o.result.as_ref().err()).collect();
    eprintln!("wrote {} run(s) to {}", outcomes.len() - failed.len(), out.display());
    if failed.is_empty() {
        Ok(())
    } else {
        anyhow::bail!("{} of {} run(s) failed, first: {}", failed.len(), outcomes.len(), failed[0])
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let settings = args.config.resolve()?;
            let outcomes = run_sweep(vec![settings], args.workers, true);
            finish(&args.out, &outcomes)
        }
        Command::Sweep(args) => {
            let grid = args.config.raw()?.expand()?;
            let outcomes = run_sweep(grid, args.workers, true);
            finish(&args.out, &outcomes)
        }
        Command::ReproducePaper(args) => {
            anyhow::ensure!(args.seeds > 0, "invalid value for `seeds`: must be at least 1");
            let outcomes = run_sweep(paper_grid(args.seed, args.seeds), args.workers, true);
            finish(&args.out, &outcomes)
        }
        Command::ValidateConfig(args) => {
            let raw = args.raw()?;
            // a list-valued config is valid when every grid point is
            let grid = raw.expand()?;
            match grid.as_slice() {
                [one] => print!("{}", to_text(one)),
                many => println!("# valid sweep of {} runs", many.len()),
            }
            Ok(())
        }
    }
}
