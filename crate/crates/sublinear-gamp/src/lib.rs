//! Bayesian generalized approximate message-passing (GAMP) for recovering
//! k-sparse signals in the sublinear sparsity regime, where the number of
//! measurements scales as M = δ·k·ln(N/k).
//!
//! The crate provides:
//!
//! - [`model`]: signal priors, problem dimensions, Gaussian sensing
//!   matrices, and the linear / 1-bit measurement channels;
//! - [`denoise`]: spike-and-slab posterior kernels for the inner module and
//!   Bayes-optimal outer denoisers;
//! - [`gamp`]: the Onsager-corrected message-passing iteration;
//! - [`sevo`]: the state-evolution recursion, EXIT-chart analysis,
//!   reconstruction thresholds, and the semi-analytic finite-size error
//!   curve;
//! - [`baselines`]: OMP, FISTA (Lasso), BIHT, and GLasso for comparisons;
//! - [`harness`]: seeded Monte Carlo experiments with CSV export and a CLI.
//!
//! The `examples/` directory holds one runnable example per capability;
//! start with `cargo run --example state_evolution`.

pub mod baselines;
pub mod denoise;
pub mod gamp;
pub mod harness;
pub(crate) mod linalg;
pub mod model;
pub mod quad;
pub mod sevo;
pub mod special;

pub use gamp::{gamp_init, gamp_iterate, gamp_run, GampConfig, GampState, GampTrace};
pub use model::{
    apply_channel, sample_matrix, sample_signal, Channel, Prior, ProblemDims, SignalInstance,
};
