//! State evolution: the simplified Bayesian recursion, EXIT-chart sampling,
//! fixed-point counting, reconstruction thresholds, and the semi-analytic
//! finite-size error curve.
//!
//! The recursion tracks two scalars per iteration,
//!
//! ```text
//! v̄_out,t  = outer(v̄_in,t)                        (channel-specific)
//! v̄_in,t+1 = E[U²·1(U² < 2·v̄_out,t/δ)]            (truncated second moment)
//! ```
//!
//! starting from `v̄_in,0 = E[U²]`. The limit `v̄_in,∞` is the asymptotic
//! unnormalized square error of Bayesian GAMP.

pub mod chart;
pub mod lemma1;

pub use chart::{count_fixed_points, exit_chart, ChartCurves, FixedPointCount};
pub use lemma1::{lemma1_curve, Lemma1Point};

use thiserror::Error;

use crate::model::{Channel, ModelError, Prior};
use crate::quad::{GaussHermite, QuadError};
use crate::special::chi2_3_cdf;

/// Default Gauss-Hermite order for the 1-bit outer expectation.
pub const DEFAULT_GH_ORDER: usize = 120;
/// v̄_in,∞ below this counts as exact reconstruction for continuous priors.
pub const ZERO_LIMIT_TOL: f64 = 1e-8;
/// Default convergence tolerance of the recursion.
pub const DEFAULT_SE_TOL: f64 = 1e-12;
/// Default iteration cap of the recursion.
pub const DEFAULT_SE_TMAX: usize = 10_000;

#[derive(Debug, Error)]
pub enum SevoError {
    #[error("truncation threshold must be non-negative, got {0}")]
    NegativeThreshold(f64),
    #[error("1-bit state evolution requires 0 <= v_in <= 1 (unit signal power), got {0}")]
    VinOutOfRange(f64),
    #[error("delta must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("u_min must be positive and finite, got {0}")]
    BadUMin(f64),
    #[error(
        "invalid bisection bracket [{lo}, {hi}]: predicate is {pred_lo} at lo and {pred_hi} at hi"
    )]
    BadBracket {
        lo: f64,
        hi: f64,
        pred_lo: bool,
        pred_hi: bool,
    },
    #[error("threshold predicate is not monotone near delta = {delta}")]
    NonMonotone { delta: f64 },
    #[error("chart grid must have at least {min} points, got {got}")]
    GridTooCoarse { min: usize, got: usize },
    #[error("chart grid must be strictly increasing and positive")]
    BadGrid,
    #[error("gamma must lie in [0, 1), got {0}")]
    BadGamma(f64),
    #[error("noise scale v must be positive and finite, got {0}")]
    BadNoiseScale(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// E[U²·1(U² < x)] with a strict inequality at the knife edge.
///
/// Exact for discrete priors; closed form (a chi-squared-3 CDF) for the
/// Gaussian prior.
pub fn truncated_second_moment(prior: &Prior, x: f64) -> Result<f64, SevoError> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(SevoError::NegativeThreshold(x));
    }
    Ok(match prior {
        Prior::Gaussian { variance } => variance * chi2_3_cdf(x / variance),
        Prior::ConstantAmplitude { amplitude } => {
            let u2 = amplitude * amplitude;
            if u2 < x {
                u2
            } else {
                0.0
            }
        }
        Prior::DiscreteMixture { points } => points
            .iter()
            .filter(|&&(u, _)| u * u < x)
            .map(|&(u, p)| p * u * u)
            .sum(),
    })
}

/// Linear channel: v̄_out = σ² + v̄_in.
pub fn se_outer_linear(v_in: f64, sigma2: f64) -> f64 {
    sigma2 + v_in
}

/// 1-bit channel: solves 1/v̄_out = 2·E[Q(Z/√s)·∂f_out/∂z(Z, −1)] with
/// Z ~ N(0, 1 − v̄_in) and s = σ² + v̄_in, by Gauss-Hermite quadrature.
///
/// Substituting ζ = z/√s merges both Gaussian factors analytically:
///
/// ```text
/// 1/v̄_out = √2/π · Σ w_i·(g(ζ_i) − ζ_i) / √(s·(1 − v̄_in + s)),
/// ζ_i = √(2(1 − v̄_in)/(1 − v̄_in + s))·t_i,
/// ```
///
/// where g is the inverse Mills ratio. The 1 − v̄_in factors cancel where
/// they must, so the rule stays exact through both degenerate limits
/// (v̄_in → 1 collapses to a point evaluation; v̄_in → 0 keeps the narrow
/// kernel resolved).
pub fn se_outer_onebit(v_in: f64, sigma2: f64, order: usize) -> Result<f64, SevoError> {
    if !(0.0..=1.0).contains(&v_in) || !v_in.is_finite() {
        return Err(SevoError::VinOutOfRange(v_in));
    }
    let s = sigma2 + v_in;
    if s == 0.0 {
        // Noiseless channel at exact reconstruction: v̄_out = 0.
        return Ok(0.0);
    }
    let var = 1.0 - v_in;
    let gh = GaussHermite::new(order)?;
    let zeta_scale = (2.0 * var / (var + s)).sqrt();
    let sum = gh.integrate(|t| crate::denoise::mills_gap(zeta_scale * t));
    let inv_v_out = std::f64::consts::SQRT_2 * sum
        / (std::f64::consts::PI * (s * (var + s)).sqrt());
    Ok(1.0 / inv_v_out)
}

fn se_outer(channel: &Channel, v_in: f64, order: usize) -> Result<f64, SevoError> {
    match channel {
        Channel::Linear { sigma2 } => Ok(se_outer_linear(v_in, *sigma2)),
        Channel::OneBitSign { sigma2 } => se_outer_onebit(v_in, *sigma2, order),
    }
}

/// Trace of the state-evolution recursion.
#[derive(Debug, Clone)]
pub struct SeTrace {
    /// v̄_in,0 … v̄_in,T (one longer than `v_out`).
    pub v_in: Vec<f64>,
    /// v̄_out,0 … v̄_out,T−1.
    pub v_out: Vec<f64>,
    pub converged: bool,
    /// Fixed-point structure of the chart, when analyzed.
    pub fixed_points: Option<FixedPointCount>,
}

impl SeTrace {
    /// The limit value v̄_in,∞ (last iterate).
    pub fn v_in_limit(&self) -> f64 {
        *self.v_in.last().expect("trace is never empty")
    }
}

fn normalize_prior_for(channel: &Channel, prior: &Prior) -> Result<Prior, SevoError> {
    if channel.is_one_bit() {
        // Eq. for the 1-bit outer expectation hardwires unit signal power.
        Ok(prior.rescaled_to_unit_power()?)
    } else {
        Ok(prior.clone())
    }
}

fn se_iterate_only(
    channel: &Channel,
    prior: &Prior,
    delta: f64,
    t_max: usize,
    tol: f64,
) -> Result<SeTrace, SevoError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(SevoError::BadDelta(delta));
    }
    let prior = normalize_prior_for(channel, prior)?;
    let mut v = prior.second_moment();
    let mut v_in = vec![v];
    let mut v_out = Vec::new();
    let mut converged = false;
    for _ in 0..t_max {
        let vo = se_outer(channel, v, DEFAULT_GH_ORDER)?;
        let vn = truncated_second_moment(&prior, 2.0 * vo / delta)?;
        v_out.push(vo);
        v_in.push(vn);
        let done = (vn - v).abs() < tol;
        v = vn;
        if done {
            converged = true;
            break;
        }
    }
    Ok(SeTrace {
        v_in,
        v_out,
        converged,
        fixed_points: None,
    })
}

/// Run the recursion until |v̄_in,t+1 − v̄_in,t| < tol or `t_max` iterations,
/// then attach the chart fixed-point count.
pub fn se_run(
    channel: &Channel,
    prior: &Prior,
    delta: f64,
    t_max: usize,
    tol: f64,
) -> Result<SeTrace, SevoError> {
    let mut trace = se_iterate_only(channel, prior, delta, t_max, tol)?;
    let curves = exit_chart(channel, prior, delta, &chart::default_grid(channel, prior, delta)?)?;
    trace.fixed_points = Some(count_fixed_points(&curves)?);
    Ok(trace)
}

/// Estimated threshold with its final bisection bracket.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdEstimate {
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

fn bisect(
    lo0: f64,
    hi0: f64,
    tol: f64,
    mut pred: impl FnMut(f64) -> Result<bool, SevoError>,
) -> Result<ThresholdEstimate, SevoError> {
    let (p_lo, p_hi) = (pred(lo0)?, pred(hi0)?);
    if p_lo || !p_hi {
        return Err(SevoError::BadBracket {
            lo: lo0,
            hi: hi0,
            pred_lo: p_lo,
            pred_hi: p_hi,
        });
    }
    let (mut lo, mut hi) = (lo0, hi0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdEstimate {
        value: 0.5 * (lo + hi),
        lo,
        hi,
    })
}

/// Reconstruction threshold δ*: smallest δ beyond which the recursion's
/// limit is zero (below [`ZERO_LIMIT_TOL`] for continuous priors, exactly
/// zero for discrete ones). Bisection over a validated bracket.
pub fn reconstruction_threshold(
    channel: &Channel,
    prior: &Prior,
    delta_lo: f64,
    delta_hi: f64,
    tol_delta: f64,
) -> Result<ThresholdEstimate, SevoError> {
    let discrete = prior.is_discrete();
    let limit_is_zero = |delta: f64| -> Result<bool, SevoError> {
        let trace = se_iterate_only(channel, prior, delta, DEFAULT_SE_TMAX, DEFAULT_SE_TOL)?;
        let lim = trace.v_in_limit();
        Ok(if discrete { lim == 0.0 } else { lim < ZERO_LIMIT_TOL })
    };
    // A coarse scan catches non-monotone predicates before bisection
    // silently converges to one of several sign changes.
    let mut seen_true = false;
    for i in 0..=8 {
        let d = delta_lo + (delta_hi - delta_lo) * i as f64 / 8.0;
        let p = limit_is_zero(d)?;
        if seen_true && !p {
            return Err(SevoError::NonMonotone { delta: d });
        }
        seen_true |= p;
    }
    bisect(delta_lo, delta_hi, tol_delta, limit_is_zero)
}

/// Weak reconstruction threshold δ_w*: smallest δ beyond which the chart has
/// a unique fixed point.
pub fn weak_reconstruction_threshold(
    channel: &Channel,
    prior: &Prior,
    delta_lo: f64,
    delta_hi: f64,
    tol_delta: f64,
) -> Result<ThresholdEstimate, SevoError> {
    let unique = |delta: f64| -> Result<bool, SevoError> {
        let grid = chart::default_grid(channel, prior, delta)?;
        let curves = exit_chart(channel, prior, delta, &grid)?;
        Ok(count_fixed_points(&curves)?.count == 1)
    };
    bisect(delta_lo, delta_hi, tol_delta, unique)
}

/// Closed-form threshold 2(1 + σ²/u_min²) for the worst-case
/// constant-amplitude signal on the linear channel.
pub fn prop1_threshold(u_min: f64, sigma2: f64) -> Result<f64, SevoError> {
    if !(u_min.is_finite() && u_min > 0.0) {
        return Err(SevoError::BadUMin(u_min));
    }
    Ok(2.0 * (1.0 + sigma2 / (u_min * u_min)))
}
