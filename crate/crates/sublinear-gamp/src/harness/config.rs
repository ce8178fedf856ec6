//! Experiment configuration: a versioned JSON schema plus validation with
//! field-level messages.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Channel, Prior};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Unreadable {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config is not valid JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("config field `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    SeChart,
    SeSweep,
    GampSweep,
    Convergence,
    Lemma1,
    Threshold,
}

/// Per-algorithm settings for the Monte Carlo experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Gamp {
        #[serde(default = "default_damping")]
        damping: f64,
    },
    /// FISTA on the Lasso. Without an explicit `lambda` the harness sweeps a
    /// 12-point logarithmic grid centered on the default weight and keeps,
    /// per δ, the best-performing point.
    Fista {
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        iterations: Option<usize>,
    },
    Omp {},
    Biht {
        #[serde(default = "default_step")]
        step: f64,
    },
    Glasso {
        #[serde(default)]
        lambda: Option<f64>,
        #[serde(default)]
        iterations: Option<usize>,
    },
}

fn default_damping() -> f64 {
    1.0
}

fn default_step() -> f64 {
    1.0
}

impl AlgorithmSpec {
    pub fn name(&self) -> &'static str {
        match self {
            AlgorithmSpec::Gamp { .. } => "gamp",
            AlgorithmSpec::Fista { .. } => "fista",
            AlgorithmSpec::Omp {} => "omp",
            AlgorithmSpec::Biht { .. } => "biht",
            AlgorithmSpec::Glasso { .. } => "glasso",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub version: u32,
    pub kind: ExperimentKind,
    pub channel: Channel,
    pub prior: Prior,
    /// Signal dimension (Monte Carlo and threshold experiments).
    #[serde(default)]
    pub n: Option<usize>,
    /// Sparsity (Monte Carlo experiments).
    #[serde(default)]
    pub k: Option<usize>,
    /// Sublinear exponent for the lemma1 experiment.
    #[serde(default)]
    pub gamma: Option<f64>,
    #[serde(default)]
    pub deltas: Vec<f64>,
    #[serde(default)]
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    /// log₂N grid for the lemma1 experiment.
    #[serde(default)]
    pub log2n_list: Vec<u32>,
    /// Noise scales v for the lemma1 experiment.
    #[serde(default)]
    pub v_list: Vec<f64>,
    /// Bisection bracket for the threshold experiment.
    #[serde(default)]
    pub delta_bracket: Option<(f64, f64)>,
    #[serde(default = "default_tol_delta")]
    pub tol_delta: f64,
    /// Also locate the weak (unique-fixed-point) threshold.
    #[serde(default)]
    pub weak_threshold: bool,
    /// Emit a gnuplot script next to the summary.
    #[serde(default)]
    pub emit_plot: bool,
    /// Record wall-clock times in the raw CSV. Off by default so rerunning
    /// the same (config, seed) writes a byte-identical file.
    #[serde(default)]
    pub record_timing: bool,
}

fn default_trials() -> usize {
    100
}

fn default_iterations() -> usize {
    20
}

fn default_tol_delta() -> f64 {
    1e-3
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Unreadable {
            path: path.to_path_buf(),
            source,
        })?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.version != CONFIG_VERSION {
            return Err(invalid(
                "version",
                format!("unsupported schema version {}, expected {CONFIG_VERSION}", self.version),
            ));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        match self.kind {
            ExperimentKind::GampSweep | ExperimentKind::Convergence => {
                if self.deltas.is_empty() {
                    return Err(invalid("deltas", "must contain at least one value"));
                }
                if self.deltas.iter().any(|&d| !(d.is_finite() && d > 0.0)) {
                    return Err(invalid("deltas", "all values must be positive and finite"));
                }
                let n = self.n.ok_or_else(|| invalid("n", "required for Monte Carlo runs"))?;
                let k = self.k.ok_or_else(|| invalid("k", "required for Monte Carlo runs"))?;
                if k == 0 || k >= n {
                    return Err(invalid("k", format!("must satisfy 1 <= k < n, got k={k}, n={n}")));
                }
                if self.iterations == 0 {
                    return Err(invalid("iterations", "must be at least 1"));
                }
                if self.algorithms.is_empty() {
                    return Err(invalid("algorithms", "must list at least one algorithm"));
                }
                for alg in &self.algorithms {
                    let one_bit = self.channel.is_one_bit();
                    match alg {
                        AlgorithmSpec::Biht { .. } | AlgorithmSpec::Glasso { .. } if !one_bit => {
                            return Err(invalid(
                                "algorithms",
                                format!("{} requires the one_bit_sign channel", alg.name()),
                            ));
                        }
                        AlgorithmSpec::Fista { .. } | AlgorithmSpec::Omp {} if one_bit => {
                            return Err(invalid(
                                "algorithms",
                                format!("{} requires the linear channel", alg.name()),
                            ));
                        }
                        _ => {}
                    }
                }
            }
            ExperimentKind::SeChart | ExperimentKind::SeSweep => {
                if self.deltas.is_empty() {
                    return Err(invalid("deltas", "must contain at least one value"));
                }
            }
            ExperimentKind::Lemma1 => {
                if self.log2n_list.is_empty() {
                    return Err(invalid("log2n_list", "must contain at least one value"));
                }
                if self.v_list.is_empty() {
                    return Err(invalid("v_list", "must contain at least one value"));
                }
                let g = self.gamma.ok_or_else(|| invalid("gamma", "required for lemma1"))?;
                if !(0.0..1.0).contains(&g) {
                    return Err(invalid("gamma", format!("must lie in [0, 1), got {g}")));
                }
            }
            ExperimentKind::Threshold => {
                let (lo, hi) = self
                    .delta_bracket
                    .ok_or_else(|| invalid("delta_bracket", "required for threshold"))?;
                if !(lo.is_finite() && hi.is_finite() && 0.0 < lo && lo < hi) {
                    return Err(invalid(
                        "delta_bracket",
                        format!("must satisfy 0 < lo < hi, got ({lo}, {hi})"),
                    ));
                }
                if !(self.tol_delta.is_finite() && self.tol_delta > 0.0) {
                    return Err(invalid("tol_delta", "must be positive"));
                }
            }
        }
        Ok(())
    }

    /// FNV-1a hash of the canonical JSON encoding; embedded in every output
    /// file header so results can be traced back to their exact config.
    /// The output directory is excluded: where results land does not change
    /// what they are.
    pub fn hash(&self) -> u64 {
        let mut canonical = self.clone();
        canonical.out_dir = PathBuf::new();
        let text = serde_json::to_string(&canonical).expect("config serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h
    }
}
