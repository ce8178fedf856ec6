//! Scalar denoising kernels: spike-and-slab posterior quantities for the
//! inner module and Bayes-optimal outer denoisers for the linear and 1-bit
//! channels.

mod outer;
mod spike_slab;

pub(crate) use outer::mills_gap;
pub use outer::{gaussian_tail, outer_linear, outer_onebit, OuterEval};
pub use spike_slab::{
    f_u_moment, log_evidence, InnerDenoiserParams, Moment, SpikeSlabScaled,
};

use ndarray::Array1;
use thiserror::Error;

use crate::model::{Prior, ProblemDims};

/// Raw ξ values below this are clamped before use as divisors downstream.
pub const XI_CLAMP_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum DenoiseError {
    #[error("variance parameter must be positive and finite, got {0}")]
    BadVariance(f64),
    #[error("effective noise variance sigma² + v_in must be positive, got {0}")]
    BadEffectiveVariance(f64),
    #[error("1-bit observation must be ±1, got {0}")]
    BadBinaryObservation(f64),
    #[error("sparsity must satisfy 1 <= k < N, got k={k}, N={n}")]
    BadSparsity { k: usize, n: usize },
}

/// Bayesian inner denoiser applied element-wise to the inner message.
///
/// Each element is mapped through the spike-and-slab posterior mean with
/// effective noise `v_tilde = v_out/(δ_eff·ln(N/k))`, and the returned slope
/// estimate is `ξ_in = Σ_n v_post(x_n)/(M·v_{k,N}) = Σ_n v_post(x_n)/v_out`.
/// `ξ_in` is returned unclamped; callers clamp with [`XI_CLAMP_FLOOR`] before
/// dividing by it.
///
/// The sum for `ξ_in` runs in fixed element order so results are independent
/// of any parallelism in the caller.
pub fn inner_denoise(
    prior: &Prior,
    dims: &ProblemDims,
    x_msg: &Array1<f64>,
    v_out: f64,
) -> Result<(Array1<f64>, f64), DenoiseError> {
    if !(v_out.is_finite() && v_out > 0.0) {
        return Err(DenoiseError::BadVariance(v_out));
    }
    // delta_eff * ln(N/k) = M/k exactly, so v_tilde = k·v_out/M.
    let v_tilde = dims.k() as f64 * v_out / dims.m() as f64;
    let params = InnerDenoiserParams::new(prior.clone(), dims.k(), dims.n(), v_tilde)?;
    let sqrt_k = (dims.k() as f64).sqrt();
    let mut xi_sum = 0.0;
    let x_hat = x_msg.mapv(|x| {
        let (mean_scaled, vpost_scaled) = params.scaled().mean_and_variance(sqrt_k * x);
        xi_sum += vpost_scaled;
        mean_scaled / sqrt_k
    });
    // Σ vpost/(M·v_{k,N}) with v_post = vpost_scaled/k and M·v_{k,N} = k·v_out.
    let xi_in = xi_sum / (dims.k() as f64 * v_out);
    Ok((x_hat, xi_in))
}
