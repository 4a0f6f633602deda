//! Batch experiment runner for `qrom-core`: named experiments driven by a JSON config,
//! writing a CSV table and a JSON sidecar per run.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;

use std::path::{Path, PathBuf};

pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
pub use experiments::{Table, EXPERIMENTS};

/// Validates the config and runs the named experiment.
pub fn run_table(cfg: &ExperimentConfig) -> CliResult<Table> {
    let exp = experiments::find(&cfg.experiment)?;
    cfg.validate()?;
    (exp.run)(cfg)
}

/// Runs the experiment and writes `<experiment>.csv` and `<experiment>.json` under `out`.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path) -> CliResult<(PathBuf, PathBuf)> {
    let table = run_table(cfg)?;
    output::write_outputs(out, cfg, &table)
}

/// One line per registered experiment: name, then description.
pub fn list_experiments() -> String {
    let width = EXPERIMENTS.iter().map(|e| e.name.len()).max().unwrap_or(0);
    EXPERIMENTS.iter().map(|e| format!("{:width$}  {}\n", e.name, e.description)).collect()
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/experiments.md")]
mod book_experiments {}
