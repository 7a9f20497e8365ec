//! Experiment configuration: a flat TOML document with typed keys.
//! Unknown keys are rejected so typos fail fast, and a parsed config
//! serializes back to an equivalent document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn default_reps() -> usize {
    10
}
fn default_seed() -> u64 {
    42
}
fn one() -> usize {
    1
}
fn default_eps() -> f64 {
    0.5
}
fn default_schedule() -> String {
    "constant".into()
}

/// One experiment: problem, optimizer, schedule, horizon, node/batch
/// counts, noise, repetitions and output location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    /// rosenbrock | counterexample | quadratic | partitioned-quadratic
    pub problem: String,
    /// signsgd-opt1 | signsgd-opt2 | majority-vote | ssdm | sgd
    pub optimizer: String,
    /// constant | inverse-sqrt
    #[serde(default = "default_schedule")]
    pub schedule: String,
    pub gamma: f64,
    /// iteration count K
    pub k: usize,
    /// problem dimension; defaults to the problem's natural dimension
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// node count for majority-vote / ssdm
    #[serde(default = "one")]
    pub m: usize,
    /// mini-batch size
    #[serde(default = "one")]
    pub tau: usize,
    /// oracle noise scale (per-coordinate standard deviation)
    #[serde(default)]
    pub nu: f64,
    /// counterexample skew parameter
    #[serde(default = "default_eps")]
    pub eps: f64,
    /// momentum override for ssdm; default is 1 - 1/sqrt(K)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// repetitions
    #[serde(default = "default_reps")]
    pub reps: usize,
    /// base seed; repetition r uses seed + r
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// CSV row stride; 0 or absent selects max(1, k / 100)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoint_stride: Option<usize>,
    /// starting point override
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    /// output directory override
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

pub const PROBLEMS: &[&str] = &[
    "rosenbrock",
    "counterexample",
    "quadratic",
    "partitioned-quadratic",
];
pub const OPTIMIZERS: &[&str] = &[
    "signsgd-opt1",
    "signsgd-opt2",
    "majority-vote",
    "ssdm",
    "sgd",
];
pub const SCHEDULES: &[&str] = &["constant", "inverse-sqrt"];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(Error::config("empty experiment id"));
        }
        if !PROBLEMS.contains(&self.problem.as_str()) {
            return Err(Error::config(format!(
                "unknown problem `{}`; valid: {}",
                self.problem,
                PROBLEMS.join(", ")
            )));
        }
        if !OPTIMIZERS.contains(&self.optimizer.as_str()) {
            return Err(Error::config(format!(
                "unknown optimizer `{}`; valid: {}",
                self.optimizer,
                OPTIMIZERS.join(", ")
            )));
        }
        if !SCHEDULES.contains(&self.schedule.as_str()) {
            return Err(Error::config(format!(
                "unknown schedule `{}`; valid: {}",
                self.schedule,
                SCHEDULES.join(", ")
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::config(format!(
                "gamma {} must be positive",
                self.gamma
            )));
        }
        if self.k == 0 {
            return Err(Error::config("k must be positive"));
        }
        if self.m == 0 {
            return Err(Error::config("m must be positive"));
        }
        if self.tau == 0 {
            return Err(Error::config("tau must be positive"));
        }
        if self.nu < 0.0 {
            return Err(Error::config(format!("nu {} must be nonnegative", self.nu)));
        }
        if self.reps == 0 {
            return Err(Error::config("reps must be positive"));
        }
        if let Some(beta) = self.beta {
            if !(0.0..1.0).contains(&beta) {
                return Err(Error::config(format!("beta {beta} outside [0, 1)")));
            }
        }
        Ok(())
    }

    /// Stride between CSV rows.
    pub fn stride(&self) -> usize {
        match self.checkpoint_stride {
            Some(s) if s > 0 => s,
            _ => (self.k / 100).max(1),
        }
    }
}
