//! Reference sparse-recovery algorithms used for comparisons: orthogonal
//! matching pursuit, FISTA for the Lasso, binary iterative hard
//! thresholding, and the generalized Lasso estimator for 1-bit data.

mod biht;
mod fista;
mod omp;

pub use biht::{biht, BihtConfig};
pub use fista::{fista, fista_traced, glasso, lambda_default, FistaConfig, FistaResult};
pub use omp::{omp, OmpResult};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("sparsity target k={k} exceeds min(M, N) = {limit}")]
    BadSparsityTarget { k: usize, limit: usize },
    #[error("regularization weight must be positive and finite, got {0}")]
    BadLambda(f64),
    #[error("backtracking factor must lie in (0, 1), got {0}")]
    BadBacktracking(f64),
    #[error("step size must be positive and finite, got {0}")]
    BadStep(f64),
    #[error("noise variance must be positive for the default lambda, got {0}")]
    BadNoiseVariance(f64),
    #[error("1-bit observations must be ±1, found {0} at index {1}")]
    BadBinaryObservation(f64, usize),
    #[error("dimension mismatch: matrix is {m}×{n}, vector has length {len}")]
    DimensionMismatch { m: usize, n: usize, len: usize },
    #[error("FISTA step size underflowed below 1e-30 during backtracking")]
    StepUnderflow,
}
