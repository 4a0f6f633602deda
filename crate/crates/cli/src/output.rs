//! CSV plus JSON sidecar writing.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};
use crate::experiments::Table;

pub const CONFIG_HASH_COLUMN: &str = "config_hash";

#[derive(Serialize)]
struct Sidecar<'a> {
    experiment: &'a str,
    version: &'a str,
    core_version: &'a str,
    config_hash: &'a str,
    csv: String,
    rows: usize,
    config: &'a ExperimentConfig,
}

/// Writes the table with a trailing hash column.
pub fn write_csv<W: std::io::Write>(out: W, table: &Table, hash: &str) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let out_err = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(table.header.iter().map(String::as_str).chain([CONFIG_HASH_COLUMN])).map_err(out_err)?;
    for row in &table.rows {
        w.write_record(row.iter().map(String::as_str).chain([hash])).map_err(out_err)?;
    }
    w.flush()?;
    Ok(())
}

/// `<dir>/<experiment>.csv` and `<dir>/<experiment>.json`; returns both paths.
pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, table: &Table) -> CliResult<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let hash = cfg.hash();
    let csv_path = dir.join(format!("{}.csv", cfg.experiment));
    write_csv(fs::File::create(&csv_path)?, table, &hash)?;
    let sidecar = Sidecar {
        experiment: &cfg.experiment,
        version: env!("CARGO_PKG_VERSION"),
        core_version: qrom_core::VERSION,
        config_hash: &hash,
        csv: csv_path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
        rows: table.rows.len(),
        config: cfg,
    };
    let json_path = dir.join(format!("{}.json", cfg.experiment));
    let text = serde_json::to_string_pretty(&sidecar).map_err(|e| CliError::Output(e.to_string()))?;
    fs::write(&json_path, text + "\n")?;
    Ok((csv_path, json_path))
}
