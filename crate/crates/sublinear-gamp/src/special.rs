//! Scalar special functions used by the denoisers and state evolution.
//!
//! Everything here is plain `f64`. The one nontrivial routine is [`erfcx`],
//! the scaled complementary error function, which keeps Gaussian tail ratios
//! (inverse Mills ratios) finite far beyond the point where `erfc` underflows.

use std::f64::consts::PI;

/// ln(2π)/2, the normalization constant of the standard Gaussian log-density.
const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Standard Gaussian density with variance `v`, `p_G(x; v)`.
#[inline]
pub fn normal_pdf(x: f64, v: f64) -> f64 {
    (-0.5 * x * x / v).exp() / (2.0 * PI * v).sqrt()
}

/// Log-density of a zero-mean Gaussian with variance `v`.
#[inline]
pub fn log_normal_pdf(x: f64, v: f64) -> f64 {
    -HALF_LN_TWO_PI - 0.5 * v.ln() - 0.5 * x * x / v
}

/// Upper tail `Q(x) = Pr(N(0,1) > x)`.
#[inline]
pub fn normal_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Logistic sigmoid, evaluated without overflow for any argument.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// log(exp(a) + exp(b)) without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// log Σ exp(x_i) over a slice, stable against overflow and empty tails.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + xs.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

/// Scaled complementary error function `erfcx(x) = exp(x²)·erfc(x)`.
///
/// For x ≥ 0 this decays like `1/(x√π)` and never underflows, which is what
/// makes the 1-bit denoiser usable at arguments where `Q(x)` itself is far
/// below the smallest subnormal. For large negative x the true value is
/// `2·exp(x²) − erfcx(−x)`, which overflows past x ≈ −26.6; we return `+inf`
/// there, and callers dividing by `erfcx` get a clean 0.
pub fn erfcx(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x >= 15.0 {
        // Asymptotic series 1/(x√π)·Σ (−1)ⁿ(2n−1)!!/(2x²)ⁿ, truncation
        // error below 4e-14 relative on this branch. The erfc product loses
        // relative accuracy approaching its underflow region, so the series
        // takes over well before that.
        let r = 1.0 / (x * x);
        let series = 1.0
            + r * (-0.5
                + r * (0.75
                    + r * (-1.875 + r * (6.5625 + r * (-29.53125 + r * 162.421875)))));
        return series / (x * PI.sqrt());
    }
    if x <= -26.0 {
        return f64::INFINITY;
    }
    // exp(x²) is representable and erfc keeps full relative accuracy here,
    // so the direct product is exact enough (≲ 1 ulp from erfc).
    (x * x).exp() * libm::erfc(x)
}

/// Inverse Mills ratio `p_G(z; 1)/Q(z)` for the standard Gaussian.
///
/// Asymptotically `z + 1/z − 2/z³ + ...` for large z; tends to 0 for z → −∞.
#[inline]
pub fn inverse_mills(z: f64) -> f64 {
    (2.0 / PI).sqrt() / erfcx(z / std::f64::consts::SQRT_2)
}

/// CDF of a chi-squared variable with 3 degrees of freedom.
///
/// Appears as the closed form of `E[U²·1(U² < x)]` for standard Gaussian U:
/// `F(x) = erf(√(x/2)) − √(2x/π)·exp(−x/2)`.
pub fn chi2_3_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    libm::erf((0.5 * x).sqrt()) - (2.0 * x / PI).sqrt() * (-0.5 * x).exp()
}
