//! Problem instances: signal priors, sparse signal sampling, Gaussian
//! sensing matrices, and measurement channels.
//!
//! Scaling convention: a k-sparse signal `x` has non-zero entries
//! `x_n = u_n/√k`, where the scaled values `u_n` are i.i.d. draws from the
//! prior of `U`, so `E‖x‖² = E[U²] = P` regardless of k. Measurements are
//! `y = g(Ax + w)` with `A` having i.i.d. standard Gaussian entries.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const PROB_SUM_TOL: f64 = 1e-12;
pub const MAX_MIXTURE_POINTS: usize = 64;

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("signal dimension must be at least 2, got {0}")]
    BadDimension(usize),
    #[error("sparsity must satisfy 1 <= k < N, got k={k}, N={n}")]
    BadSparsity { k: usize, n: usize },
    #[error("sample-complexity prefactor must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("prior variance must be positive and finite, got {0}")]
    BadVariance(f64),
    #[error("non-zero amplitude must be positive and finite, got {0}")]
    BadAmplitude(f64),
    #[error("mixture probabilities must sum to 1 within {PROB_SUM_TOL}, got {0}")]
    BadProbabilitySum(f64),
    #[error("mixture point {index} is invalid: value {value}, probability {prob}")]
    BadMixturePoint { index: usize, value: f64, prob: f64 },
    #[error("mixture is limited to {MAX_MIXTURE_POINTS} points, got {0}")]
    TooManyPoints(usize),
    #[error("mixture must contain at least one point")]
    EmptyMixture,
    #[error("noise variance must be non-negative and finite, got {0}")]
    BadNoiseVariance(f64),
    #[error("prior cannot be rescaled to unit power (second moment {0})")]
    NotRescalable(f64),
}

/// Distribution of the scaled non-zero signal element U.
///
/// No point mass at the origin is allowed, and E[U²] must be positive and
/// finite; both are enforced at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prior {
    /// U ~ N(0, variance).
    Gaussian { variance: f64 },
    /// |U| ≡ amplitude with symmetric random sign.
    ConstantAmplitude { amplitude: f64 },
    /// Finite mixture of point masses at non-zero values.
    DiscreteMixture { points: Vec<(f64, f64)> },
}

impl Prior {
    pub fn gaussian(variance: f64) -> Result<Self, ModelError> {
        if !(variance.is_finite() && variance > 0.0) {
            return Err(ModelError::BadVariance(variance));
        }
        Ok(Prior::Gaussian { variance })
    }

    pub fn constant_amplitude(amplitude: f64) -> Result<Self, ModelError> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(ModelError::BadAmplitude(amplitude));
        }
        Ok(Prior::ConstantAmplitude { amplitude })
    }

    pub fn discrete_mixture(points: Vec<(f64, f64)>) -> Result<Self, ModelError> {
        if points.is_empty() {
            return Err(ModelError::EmptyMixture);
        }
        if points.len() > MAX_MIXTURE_POINTS {
            return Err(ModelError::TooManyPoints(points.len()));
        }
        for (i, &(u, p)) in points.iter().enumerate() {
            if !(u.is_finite() && u != 0.0 && p.is_finite() && p > 0.0) {
                return Err(ModelError::BadMixturePoint {
                    index: i,
                    value: u,
                    prob: p,
                });
            }
        }
        let total: f64 = points.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > PROB_SUM_TOL {
            return Err(ModelError::BadProbabilitySum(total));
        }
        Ok(Prior::DiscreteMixture { points })
    }

    /// Second moment P = E[U²].
    pub fn second_moment(&self) -> f64 {
        match self {
            Prior::Gaussian { variance } => *variance,
            Prior::ConstantAmplitude { amplitude } => amplitude * amplitude,
            Prior::DiscreteMixture { points } => {
                points.iter().map(|&(u, p)| p * u * u).sum()
            }
        }
    }

    /// Essential minimum of |U| (0 for the Gaussian prior).
    pub fn min_amplitude(&self) -> f64 {
        match self {
            Prior::Gaussian { .. } => 0.0,
            Prior::ConstantAmplitude { amplitude } => *amplitude,
            Prior::DiscreteMixture { points } => points
                .iter()
                .map(|&(u, _)| u.abs())
                .fold(f64::INFINITY, f64::min),
        }
    }

    pub fn is_discrete(&self) -> bool {
        !matches!(self, Prior::Gaussian { .. })
    }

    /// Same shape scaled so that E[U²] = 1, as required by the 1-bit state
    /// evolution.
    pub fn rescaled_to_unit_power(&self) -> Result<Prior, ModelError> {
        let p = self.second_moment();
        if !(p.is_finite() && p > 0.0) {
            return Err(ModelError::NotRescalable(p));
        }
        let s = p.sqrt();
        Ok(match self {
            Prior::Gaussian { variance } => Prior::Gaussian {
                variance: variance / p,
            },
            Prior::ConstantAmplitude { amplitude } => Prior::ConstantAmplitude {
                amplitude: amplitude / s,
            },
            Prior::DiscreteMixture { points } => Prior::DiscreteMixture {
                points: points.iter().map(|&(u, pr)| (u / s, pr)).collect(),
            },
        })
    }

    /// Draw one value of U.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Prior::Gaussian { variance } => {
                let z: f64 = rng.sample(StandardNormal);
                variance.sqrt() * z
            }
            Prior::ConstantAmplitude { amplitude } => {
                if rng.random::<bool>() {
                    *amplitude
                } else {
                    -*amplitude
                }
            }
            Prior::DiscreteMixture { points } => {
                let mut u: f64 = rng.random();
                for &(value, p) in points {
                    if u < p {
                        return value;
                    }
                    u -= p;
                }
                points[points.len() - 1].0
            }
        }
    }
}

/// Dimensions (N, k, M, δ) with M = max(1, round(δ·k·ln(N/k))).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemDims {
    n: usize,
    k: usize,
    m: usize,
    delta_requested: f64,
}

impl ProblemDims {
    pub fn new(n: usize, k: usize, delta: f64) -> Result<Self, ModelError> {
        if n < 2 {
            return Err(ModelError::BadDimension(n));
        }
        if k == 0 || k >= n {
            return Err(ModelError::BadSparsity { k, n });
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(ModelError::BadDelta(delta));
        }
        let scale = k as f64 * (n as f64 / k as f64).ln();
        let m = (delta * scale).round().max(1.0) as usize;
        Ok(Self {
            n,
            k,
            m,
            delta_requested: delta,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn delta_requested(&self) -> f64 {
        self.delta_requested
    }

    /// ln(N/k), the natural-log measurement scale.
    pub fn log_ratio(&self) -> f64 {
        (self.n as f64 / self.k as f64).ln()
    }

    /// δ_eff = M/(k·ln(N/k)), the prefactor actually realized after rounding.
    pub fn delta_eff(&self) -> f64 {
        self.m as f64 / (self.k as f64 * self.log_ratio())
    }
}

/// Measurement channel y = g(z + w).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Channel {
    /// y = z + w, w ~ N(0, σ²I).
    Linear { sigma2: f64 },
    /// y = sign(z + w) ∈ {−1, +1}, with sign(0) := +1.
    OneBitSign { sigma2: f64 },
}

impl Channel {
    pub fn linear(sigma2: f64) -> Result<Self, ModelError> {
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(ModelError::BadNoiseVariance(sigma2));
        }
        Ok(Channel::Linear { sigma2 })
    }

    pub fn one_bit_sign(sigma2: f64) -> Result<Self, ModelError> {
        if !(sigma2.is_finite() && sigma2 >= 0.0) {
            return Err(ModelError::BadNoiseVariance(sigma2));
        }
        Ok(Channel::OneBitSign { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        match self {
            Channel::Linear { sigma2 } | Channel::OneBitSign { sigma2 } => *sigma2,
        }
    }

    pub fn is_one_bit(&self) -> bool {
        matches!(self, Channel::OneBitSign { .. })
    }
}

/// A sampled k-sparse signal: the vector, its support, and the scaled
/// non-zero values u_n = √k·x_n.
#[derive(Debug, Clone)]
pub struct SignalInstance {
    pub x: Array1<f64>,
    pub support: Vec<usize>,
    pub u: Vec<f64>,
}

/// Draw a signal with a uniform random k-subset support and i.i.d. scaled
/// non-zeros from the prior.
pub fn sample_signal<R: Rng + ?Sized>(
    dims: &ProblemDims,
    prior: &Prior,
    rng: &mut R,
) -> SignalInstance {
    let mut support = rand::seq::index::sample(rng, dims.n(), dims.k()).into_vec();
    support.sort_unstable();
    let u: Vec<f64> = (0..dims.k()).map(|_| prior.sample(rng)).collect();
    let scale = (dims.k() as f64).sqrt().recip();
    let mut x = Array1::zeros(dims.n());
    for (&idx, &val) in support.iter().zip(&u) {
        x[idx] = val * scale;
    }
    SignalInstance { x, support, u }
}

/// Dense M×N sensing matrix with i.i.d. N(0,1) entries, row-major.
pub fn sample_matrix<R: Rng + ?Sized>(dims: &ProblemDims, rng: &mut R) -> Array2<f64> {
    let mut a = Array2::zeros((dims.m(), dims.n()));
    for v in a.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    a
}

/// Push a clean measurement vector z through the channel.
pub fn apply_channel<R: Rng + ?Sized>(
    channel: &Channel,
    z: &Array1<f64>,
    rng: &mut R,
) -> Array1<f64> {
    let sigma = channel.sigma2().sqrt();
    match channel {
        Channel::Linear { .. } => z.mapv(|zi| {
            let w: f64 = rng.sample(StandardNormal);
            zi + sigma * w
        }),
        Channel::OneBitSign { .. } => z.mapv(|zi| {
            let w: f64 = rng.sample(StandardNormal);
            if zi + sigma * w >= 0.0 {
                1.0
            } else {
                -1.0
            }
        }),
    }
}
