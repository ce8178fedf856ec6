//! Spike-and-slab posterior quantities.
//!
//! The model is a scalar Gaussian observation of a sparse coefficient:
//! with probability k/N the coefficient is active and carries a value of U,
//! otherwise it is exactly zero. All quantities are evaluated in the scaled
//! coordinate `ỹ = √k·y`, where the active component sees noise variance
//! `v_tilde` and the posterior activity odds pick up the factor k/(N−k).
//!
//! Everything runs in the log domain: activity probabilities are sigmoids of
//! log-odds, and slab evidence is a log-sum-exp over mixture points, so no
//! Gaussian ratio is ever formed directly.

use super::DenoiseError;
use crate::model::Prior;
use crate::special::{log_normal_pdf, log_sum_exp, sigmoid};

/// Posterior moment order for the slab value U.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moment {
    First,
    Second,
}

/// Log of the slab evidence `E_U[p_G(ỹ − U; v)]`.
pub fn log_evidence(prior: &Prior, y_tilde: f64, v: f64) -> Result<f64, DenoiseError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(DenoiseError::BadVariance(v));
    }
    Ok(match prior {
        Prior::Gaussian { variance } => log_normal_pdf(y_tilde, variance + v),
        _ => with_points(prior, |pts| {
            let terms: Vec<f64> = pts
                .iter()
                .map(|&(u, p)| p.ln() + log_normal_pdf(y_tilde - u, v))
                .collect();
            log_sum_exp(&terms)
        }),
    })
}

/// Posterior moment `E[U^i | ỹ]` of the slab value given an active
/// coefficient.
pub fn f_u_moment(
    prior: &Prior,
    y_tilde: f64,
    v: f64,
    moment: Moment,
) -> Result<f64, DenoiseError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(DenoiseError::BadVariance(v));
    }
    Ok(match prior {
        Prior::Gaussian { variance } => {
            let m1 = variance * y_tilde / (variance + v);
            match moment {
                Moment::First => m1,
                Moment::Second => m1 * m1 + variance * v / (variance + v),
            }
        }
        _ => with_points(prior, |pts| discrete_moments(pts, y_tilde, v, moment)),
    })
}

fn discrete_moments(points: &[(f64, f64)], y_tilde: f64, v: f64, moment: Moment) -> f64 {
    // Softmax weights w_i ∝ p_i·exp((2ỹu_i − u_i²)/(2v)); the ỹ² term of the
    // Gaussian cancels in the ratio, which keeps huge ỹ exact.
    let mut logits = [0.0f64; crate::model::MAX_MIXTURE_POINTS];
    let n = points.len();
    let mut max = f64::NEG_INFINITY;
    for (i, &(u, p)) in points.iter().enumerate() {
        let l = p.ln() + (2.0 * y_tilde * u - u * u) / (2.0 * v);
        logits[i] = l;
        if l > max {
            max = l;
        }
    }
    let mut z = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (i, &(u, _)) in points.iter().enumerate().take(n) {
        let w = (logits[i] - max).exp();
        z += w;
        m1 += w * u;
        m2 += w * u * u;
    }
    match moment {
        Moment::First => m1 / z,
        Moment::Second => m2 / z,
    }
}

fn with_points<T>(prior: &Prior, f: impl FnOnce(&[(f64, f64)]) -> T) -> T {
    match prior {
        Prior::ConstantAmplitude { amplitude } => {
            f(&[(*amplitude, 0.5), (-*amplitude, 0.5)])
        }
        Prior::DiscreteMixture { points } => f(points),
        Prior::Gaussian { .. } => unreachable!("gaussian prior handled by closed form"),
    }
}

/// Spike-and-slab posterior in the scaled coordinate ỹ = √k·y.
///
/// Holds the prior, the log activity ratio ln(k/(N−k)), and the scaled noise
/// variance v_tilde. Dimensions enter only through the log ratio, so the
/// same code serves both integer-sized problems and the log-domain regime
/// where N is far beyond 2^53.
#[derive(Debug, Clone)]
pub struct SpikeSlabScaled {
    prior: Prior,
    log_active_ratio: f64,
    v_tilde: f64,
}

impl SpikeSlabScaled {
    pub fn new(prior: Prior, log_active_ratio: f64, v_tilde: f64) -> Result<Self, DenoiseError> {
        if !(v_tilde.is_finite() && v_tilde > 0.0) {
            return Err(DenoiseError::BadVariance(v_tilde));
        }
        Ok(Self {
            prior,
            log_active_ratio,
            v_tilde,
        })
    }

    pub fn from_counts(prior: Prior, k: usize, n: usize, v_tilde: f64) -> Result<Self, DenoiseError> {
        if k == 0 || k >= n {
            return Err(DenoiseError::BadSparsity { k, n });
        }
        let lar = (k as f64).ln() - ((n - k) as f64).ln();
        Self::new(prior, lar, v_tilde)
    }

    pub fn v_tilde(&self) -> f64 {
        self.v_tilde
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    /// Log-odds of activity: ln(k/(N−k)) + ln E_U[p_G(ỹ−U;v)] − ln p_G(ỹ;v).
    pub(crate) fn activity_logit(&self, y_tilde: f64) -> f64 {
        let v = self.v_tilde;
        let ems = match &self.prior {
            Prior::Gaussian { variance } => {
                // 0.5·ln(v/(v+σ_U²)) + ỹ²·σ_U²/(2v(v+σ_U²)), with the square
                // taken after scaling so huge ỹ saturates to +inf, not NaN.
                let root = y_tilde * (variance / (2.0 * v * (variance + v))).sqrt();
                0.5 * (v / (variance + v)).ln() + root * root
            }
            _ => with_points(&self.prior, |pts| {
                let terms: Vec<f64> = pts
                    .iter()
                    .map(|&(u, p)| p.ln() + (2.0 * y_tilde * u - u * u) / (2.0 * v))
                    .collect();
                log_sum_exp(&terms)
            }),
        };
        self.log_active_ratio + ems
    }

    /// Posterior activity probability f_A(ỹ) ∈ [0, 1].
    pub fn activity(&self, y_tilde: f64) -> f64 {
        sigmoid(self.activity_logit(y_tilde))
    }

    /// f_A(ỹ)·E[U|ỹ], which equals √k·f_X(ỹ/√k).
    pub fn scaled_mean(&self, y_tilde: f64) -> f64 {
        self.activity(y_tilde)
            * f_u_moment(&self.prior, y_tilde, self.v_tilde, Moment::First)
                .expect("v_tilde validated at construction")
    }

    /// Returns (f_A·E[U|ỹ], k·v_post(ỹ)) in one pass.
    pub fn mean_and_variance(&self, y_tilde: f64) -> (f64, f64) {
        let fa = self.activity(y_tilde);
        let m1 = f_u_moment(&self.prior, y_tilde, self.v_tilde, Moment::First)
            .expect("v_tilde validated at construction");
        let m2 = f_u_moment(&self.prior, y_tilde, self.v_tilde, Moment::Second)
            .expect("v_tilde validated at construction");
        let mean = fa * m1;
        // Non-negative analytically; guard the subtraction against rounding.
        let var = (fa * m2 - mean * mean).max(0.0);
        (mean, var)
    }
}

/// Inner denoiser parameters for an integer-sized problem: the posterior
/// moments of X_n = A_n·U_n/√k observed through Gaussian noise.
#[derive(Debug, Clone)]
pub struct InnerDenoiserParams {
    k: usize,
    n: usize,
    sqrt_k: f64,
    scaled: SpikeSlabScaled,
}

impl InnerDenoiserParams {
    pub fn new(prior: Prior, k: usize, n: usize, v_tilde: f64) -> Result<Self, DenoiseError> {
        let scaled = SpikeSlabScaled::from_counts(prior, k, n, v_tilde)?;
        Ok(Self {
            k,
            n,
            sqrt_k: (k as f64).sqrt(),
            scaled,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn scaled(&self) -> &SpikeSlabScaled {
        &self.scaled
    }

    /// v_{k,N} = v_tilde/k, the per-coordinate noise variance on X.
    pub fn v_kn(&self) -> f64 {
        self.scaled.v_tilde() / self.k as f64
    }

    /// Posterior activity probability evaluated at the scaled input.
    pub fn f_a(&self, y_tilde: f64) -> f64 {
        self.scaled.activity(y_tilde)
    }

    /// Posterior mean f_X(y) = k^{-1/2}·f_A(√k y)·f_U(√k y).
    pub fn f_x(&self, y: f64) -> f64 {
        self.scaled.scaled_mean(self.sqrt_k * y) / self.sqrt_k
    }

    /// Posterior second moment f_X^{(2)}(y) = k^{-1}·f_A(√k y)·f_U^{(2)}(√k y).
    pub fn f_x_second(&self, y: f64) -> f64 {
        let yt = self.sqrt_k * y;
        let fa = self.scaled.activity(yt);
        let m2 = f_u_moment(self.scaled.prior(), yt, self.scaled.v_tilde(), Moment::Second)
            .expect("validated");
        fa * m2 / self.k as f64
    }

    /// Posterior variance v_post(y) = f_X^{(2)}(y) − f_X(y)² ≥ 0.
    pub fn posterior_variance(&self, y: f64) -> f64 {
        let (_, var) = self.scaled.mean_and_variance(self.sqrt_k * y);
        var / self.k as f64
    }

    /// Derivative f_X'(y) = v_post(y)/v_{k,N}.
    pub fn f_x_prime(&self, y: f64) -> f64 {
        self.posterior_variance(y) / self.v_kn()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn gaussian() -> Prior {
        Prior::gaussian(1.0).unwrap()
    }

    #[test]
    fn log_evidence_gaussian_convolution() {
        // Gaussian(P=1), ỹ=0, v=1 → log p_G(0; 2) = −0.5·ln(4π).
        let le = log_evidence(&gaussian(), 0.0, 1.0).unwrap();
        assert_relative_eq!(le, -0.5 * (4.0 * PI).ln(), max_relative = 1e-14);
    }

    #[test]
    fn log_evidence_constant_amplitude_symmetry() {
        // ConstantAmplitude(u=1), ỹ=0, v=1: both signs equidistant, so the
        // evidence is p_G(1; 1) exactly.
        let prior = Prior::constant_amplitude(1.0).unwrap();
        let le = log_evidence(&prior, 0.0, 1.0).unwrap();
        assert_relative_eq!(le, log_normal_pdf(1.0, 1.0), max_relative = 1e-14);
    }

    #[test]
    fn log_evidence_matches_linear_domain_summation() {
        let prior =
            Prior::discrete_mixture(vec![(0.7, 0.2), (-1.3, 0.5), (2.2, 0.3)]).unwrap();
        for &y in &[-2.0, -0.3, 0.0, 0.9, 3.5] {
            let le = log_evidence(&prior, y, 0.8).unwrap();
            let direct: f64 = [(0.7, 0.2), (-1.3, 0.5), (2.2, 0.3)]
                .iter()
                .map(|&(u, p): &(f64, f64)| p * crate::special::normal_pdf(y - u, 0.8))
                .sum();
            assert_relative_eq!(le, direct.ln(), max_relative = 1e-12);
        }
    }

    #[test]
    fn log_evidence_rejects_bad_variance() {
        assert!(log_evidence(&gaussian(), 0.0, 0.0).is_err());
        assert!(log_evidence(&gaussian(), 0.0, -1.0).is_err());
    }

    #[test]
    fn f_u_gaussian_closed_form() {
        // f_U(y; v) = σ_U²·y/(σ_U² + v): at P=1, ỹ=2, v=1 → 1.0.
        let m = f_u_moment(&gaussian(), 2.0, 1.0, Moment::First).unwrap();
        assert_relative_eq!(m, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn f_u_symmetric_prior_is_odd_and_constant_second_moment() {
        let prior = Prior::constant_amplitude(1.0).unwrap();
        assert_eq!(
            f_u_moment(&prior, 0.0, 0.5, Moment::First).unwrap(),
            0.0
        );
        for &y in &[-4.0, 0.1, 2.0, 1e6] {
            let m2 = f_u_moment(&prior, y, 0.5, Moment::Second).unwrap();
            assert_relative_eq!(m2, 1.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn activity_saturates_for_strong_evidence() {
        // Gaussian prior, ỹ = 100, v = 0.1, k/N = 2^-12 → f_A ≥ 1 − 1e−6.
        let ss = SpikeSlabScaled::from_counts(gaussian(), 16, 16 << 12, 0.1).unwrap();
        assert!(ss.activity(100.0) >= 1.0 - 1e-6);
        assert!(ss.activity(0.0) <= 1e-3);
    }

    #[test]
    fn activity_two_coordinate_bayes_rule() {
        // N=2, k=1, ConstantAmplitude(1), ỹ=0.5, v=1:
        // p1 = ½[p_G(−0.5;1) + p_G(1.5;1)], p0 = p_G(0.5;1).
        let prior = Prior::constant_amplitude(1.0).unwrap();
        let ss = SpikeSlabScaled::from_counts(prior, 1, 2, 1.0).unwrap();
        let p1 = 0.5
            * (crate::special::normal_pdf(-0.5, 1.0) + crate::special::normal_pdf(1.5, 1.0));
        let p0 = crate::special::normal_pdf(0.5, 1.0);
        assert_relative_eq!(ss.activity(0.5), p1 / (p1 + p0), max_relative = 1e-12);
    }

    #[test]
    fn activity_is_a_probability_at_extreme_inputs() {
        let ss = SpikeSlabScaled::from_counts(gaussian(), 3, 1000, 0.25).unwrap();
        for &y in &[-1e12, -1e6, -5.0, 0.0, 5.0, 1e6, 1e12] {
            let a = ss.activity(y);
            assert!((0.0..=1.0).contains(&a), "fA({y}) = {a}");
        }
    }

    #[test]
    fn f_x_composition_matches_hand_recomposition() {
        // Independent recomposition of the three factors at N=2^16, k=16.
        let params = InnerDenoiserParams::new(gaussian(), 16, 1 << 16, 0.1).unwrap();
        let y = 1.0;
        let yt = 4.0 * y;
        let fa = {
            let num = (16.0f64).ln() + log_evidence(&gaussian(), yt, 0.1).unwrap();
            let den = ((1 << 16) as f64 - 16.0).ln() + log_normal_pdf(yt, 0.1);
            1.0 / (1.0 + (den - num).exp())
        };
        let fu = f_u_moment(&gaussian(), yt, 0.1, Moment::First).unwrap();
        assert_relative_eq!(params.f_x(y), fa * fu / 4.0, max_relative = 1e-12);
    }

    #[test]
    fn f_x_is_odd_and_bounded_by_slab_mean() {
        let params = InnerDenoiserParams::new(gaussian(), 16, 4096, 0.3).unwrap();
        for &y in &[-2.0, -0.7, 0.01, 0.4, 3.0] {
            assert_relative_eq!(params.f_x(-y), -params.f_x(y), max_relative = 1e-12);
            let bound = f_u_moment(&gaussian(), 4.0 * y, 0.3, Moment::First)
                .unwrap()
                .abs()
                / 4.0;
            assert!(params.f_x(y).abs() <= bound + 1e-15);
        }
        assert_eq!(params.f_x(0.0), 0.0);
    }

    #[test]
    fn posterior_variance_nonnegative_and_vanishes_when_saturated() {
        let prior = Prior::constant_amplitude(1.0).unwrap();
        let params = InnerDenoiserParams::new(prior, 16, 4096, 0.01).unwrap();
        for &y in &[-3.0, -0.2, 0.0, 0.5, 2.0] {
            assert!(params.posterior_variance(y) >= 0.0);
        }
        // Saturated activity and sign at √k·y = 10·u_min.
        let y = 10.0 / 4.0;
        assert!(params.f_a(4.0 * y) > 1.0 - 1e-9);
        assert!(params.posterior_variance(y) < 1e-12);
    }

    #[test]
    fn f_x_prime_matches_finite_differences() {
        for (prior, k, n) in [
            (gaussian(), 16usize, 1usize << 12),
            (Prior::constant_amplitude(1.0).unwrap(), 8, 1 << 10),
            (
                Prior::discrete_mixture(vec![(0.5, 0.25), (-1.5, 0.75)]).unwrap(),
                4,
                2048,
            ),
        ] {
            let params = InnerDenoiserParams::new(prior, k, n, 0.2).unwrap();
            let p = params.scaled().prior().second_moment();
            let reach = 10.0 * (p / k as f64).sqrt() + 10.0 * params.v_kn().sqrt();
            for i in 0..41 {
                let y = -reach + 2.0 * reach * i as f64 / 40.0;
                let h = 1e-6 * y.abs().max(1.0);
                let fd = (params.f_x(y + h) - params.f_x(y - h)) / (2.0 * h);
                let an = params.f_x_prime(y);
                assert!(an >= 0.0);
                let gap = (fd - an).abs();
                assert!(
                    gap / an.abs().max(fd.abs()).max(1e-12) < 1e-5 || gap < 1e-9,
                    "y={y}: fd={fd}, analytic={an}"
                );
            }
        }
    }
}
