//! The experiment configuration file (JSON).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSpec {
    /// `owf`, `prg`, `salted:<inner>:<K>` or `yz:<code-file>`.
    pub selector: String,
    #[serde(default = "two")]
    pub n: usize,
    #[serde(default = "two")]
    pub m: usize,
}

fn two() -> usize {
    2
}

impl Default for GameSpec {
    fn default() -> Self {
        Self { selector: "owf".into(), n: 2, m: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnsembleSpec {
    Exhaustive {
        #[serde(default = "default_cap")]
        cap: u64,
    },
    /// Oracles drawn with a seed derived from the run seed.
    Sampled { count: usize },
}

fn default_cap() -> u64 {
    1 << 16
}

impl Default for EnsembleSpec {
    fn default() -> Self {
        EnsembleSpec::Exhaustive { cap: default_cap() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdviceSpec {
    #[default]
    Uniform,
    /// Per-oracle top eigenvector of the compressed operator.
    Optimal,
}

/// Experiment parameters; each experiment reads the ones it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub n: Option<f64>,
    pub m: Option<f64>,
    pub k: Option<f64>,
    pub c: Option<f64>,
    pub nu: Option<f64>,
    pub t_samp: Option<f64>,
    pub t_verify: Option<f64>,
    pub trusted_constant: Option<bool>,
    /// Bound names for the calculator and sweep.
    pub which: Option<Vec<String>>,
    pub s_values: Option<Vec<f64>>,
    pub gamma_grid: Option<Vec<f64>>,
    /// Largest round count for alternating-measurement experiments.
    pub k_max: Option<usize>,
    /// Trajectory samples per oracle.
    pub samples: Option<usize>,
    /// Random micro instances.
    pub instances: Option<usize>,
    pub fuzz_samples: Option<usize>,
    /// Advice qubits, upper end of the curve.
    pub s_max: Option<u32>,
    pub trials: Option<usize>,
    /// Presampling budget.
    pub p: Option<usize>,
    pub zeta: Option<Vec<f64>>,
    pub code_n: Option<usize>,
    pub code_sigma: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub game: GameSpec,
    /// JSON strategy file; the identity strategy on the answer register when absent.
    #[serde(default)]
    pub strategy: Option<PathBuf>,
    #[serde(default)]
    pub advice: AdviceSpec,
    #[serde(default)]
    pub ensemble: EnsembleSpec,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn named(experiment: &str) -> Self {
        Self { experiment: experiment.into(), ..Default::default() }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Referenced files exist; numeric parameters are in range.
    pub fn validate(&self) -> CliResult<()> {
        if let Some(path) = &self.strategy {
            if !path.is_file() {
                return Err(CliError::Config(format!("strategy file {} not found", path.display())));
            }
        }
        if let Some(code) = self.game.selector.strip_prefix("yz:") {
            if !Path::new(code).is_file() {
                return Err(CliError::Config(format!("code file {code} not found")));
            }
        }
        let p = &self.params;
        if let Some(k) = p.k_max {
            if k == 0 || k > qrom_core::altmeas::MAX_EXACT_ROUNDS {
                return Err(CliError::Config(format!("k_max = {k} outside 1..={}", qrom_core::altmeas::MAX_EXACT_ROUNDS)));
            }
        }
        if matches!(p.samples, Some(0)) || matches!(p.instances, Some(0)) || matches!(p.trials, Some(0)) {
            return Err(CliError::Config("samples, instances and trials must be positive".into()));
        }
        if let Some(z) = &p.zeta {
            if z.iter().any(|z| !(0.0..=1.0).contains(z)) {
                return Err(CliError::Config("zeta values must lie in [0, 1]".into()));
            }
        }
        if let Some(g) = &p.gamma_grid {
            if g.is_empty() || g.iter().any(|g| !(*g > 0.0 && *g <= 1.0)) {
                return Err(CliError::Config("gamma_grid must be a non-empty list in (0, 1]".into()));
            }
        }
        if let Some(s) = p.s_max {
            if s > 6 {
                return Err(CliError::Config(format!("s_max = {s} exceeds 6")));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form; the output directory is not part of it.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_missing_sections() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "altmeas-sweep"}"#).unwrap();
        assert_eq!(cfg.game, GameSpec::default());
        assert_eq!(cfg.ensemble, EnsembleSpec::Exhaustive { cap: 1 << 16 });
        assert_eq!(cfg.advice, AdviceSpec::Uniform);
    }

    #[test]
    fn hash_ignores_output_directory() {
        let mut a = ExperimentConfig::named("bound-sweep");
        let h = a.hash();
        assert_eq!(h.len(), 64);
        a.out = Some("elsewhere".into());
        assert_eq!(a.hash(), h);
        a.params.s = Some(3.0);
        assert_ne!(a.hash(), h);
    }

    #[test]
    fn range_checks() {
        let bad = [
            r#"{"experiment": "x", "params": {"k_max": 0}}"#,
            r#"{"experiment": "x", "params": {"k_max": 1000}}"#,
            r#"{"experiment": "x", "params": {"zeta": [1.5]}}"#,
            r#"{"experiment": "x", "params": {"gamma_grid": []}}"#,
            r#"{"experiment": "x", "params": {"samples": 0}}"#,
            r#"{"experiment": "x", "game": {"selector": "yz:/missing.json"}}"#,
        ];
        for text in bad {
            let err = ExperimentConfig::from_json(text).unwrap().validate().unwrap_err();
            assert_eq!(err.exit_code(), 2, "{text}");
        }
        let sampled = r#"{"experiment": "x", "ensemble": {"mode": "sampled", "count": 8}}"#;
        ExperimentConfig::from_json(sampled).unwrap().validate().unwrap();
    }
}
