//! Experiment harness: configuration, metrics, seeded Monte Carlo
//! execution, CSV and gnuplot-script emission, and the CLI.

pub mod cli;
pub mod config;
pub mod gnuplot;
pub mod metrics;
pub mod runner;

pub use config::{AlgorithmSpec, ConfigError, ExperimentConfig, ExperimentKind};
pub use metrics::{metric_normalized, metric_unnormalized, support_recovered, MetricError};
pub use runner::{run_experiment, trial_rng, HarnessError, RunArtifacts, TrialRow};
