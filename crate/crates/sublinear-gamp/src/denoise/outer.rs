//! Bayes-optimal outer denoisers for the measurement channels.

use super::DenoiseError;
use crate::special::{erfcx, inverse_mills};

/// Outer denoiser output: the value f_out(z_t, y) and its partial derivative
/// with respect to z_t.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OuterEval {
    pub value: f64,
    pub dz: f64,
}

/// Linear channel: f_out = (z_t − y)/(σ² + v_in), with constant slope.
pub fn outer_linear(z_t: f64, y: f64, v_in: f64, sigma2: f64) -> Result<OuterEval, DenoiseError> {
    let s = sigma2 + v_in;
    if !(s.is_finite() && s > 0.0) {
        return Err(DenoiseError::BadEffectiveVariance(s));
    }
    Ok(OuterEval {
        value: (z_t - y) / s,
        dz: 1.0 / s,
    })
}

/// Gap g(ζ) − ζ between the inverse Mills ratio and its argument.
///
/// Direct subtraction loses relative accuracy like ε·ζ² for large positive ζ,
/// so past ζ = 10⁴ the asymptotic tail 1/ζ − 2/ζ³ + 10/ζ⁵ takes over.
pub(crate) fn mills_gap(zeta: f64) -> f64 {
    if zeta > 1e4 {
        let r = 1.0 / zeta;
        let r2 = r * r;
        r * (1.0 + r2 * (-2.0 + 10.0 * r2))
    } else {
        inverse_mills(zeta) - zeta
    }
}

/// 1-bit sign channel.
///
/// For y = −1, f(z_t) = p_G(z_t; s)/Q(z_t/√s) with s = σ² + v_in: the
/// Gaussian smoothing integral against the noisy sign collapses to a single
/// tail probability, exactly, including σ² = 0. The y = +1 branch follows
/// from the symmetry f(z, +1) = −f(−z, −1). Everything is evaluated through
/// the scaled complementary error function so large |z_t| stays finite.
pub fn outer_onebit(z_t: f64, y: f64, v_in: f64, sigma2: f64) -> Result<OuterEval, DenoiseError> {
    if y != 1.0 && y != -1.0 {
        return Err(DenoiseError::BadBinaryObservation(y));
    }
    let s = sigma2 + v_in;
    if !(s.is_finite() && s > 0.0) {
        return Err(DenoiseError::BadEffectiveVariance(s));
    }
    let sqrt_s = s.sqrt();
    // Mirror the y = +1 case onto the y = −1 formula.
    let zeta = if y < 0.0 { z_t } else { -z_t } / sqrt_s;
    let g = inverse_mills(zeta);
    let value = if y < 0.0 { g } else { -g } / sqrt_s;
    // dz = f·(f − z_t/s) reduces to g(ζ)·(g(ζ) − ζ)/s on both branches;
    // both factors are positive, so the slope never loses its sign.
    let dz = if g == 0.0 { 0.0 } else { g * mills_gap(zeta) / s };
    Ok(OuterEval { value, dz })
}

/// Complementary CDF of N(0, 1), exported for oracle tests of the collapsed
/// smoothing integral.
pub fn gaussian_tail(x: f64) -> f64 {
    0.5 * erfcx(x / std::f64::consts::SQRT_2) * (-0.5 * x * x).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn linear_basics() {
        let e = outer_linear(1.0, 1.0, 0.5, 0.0).unwrap();
        assert_eq!(e.value, 0.0);
        let e = outer_linear(1.0, 0.0, 0.5, 0.0).unwrap();
        assert_relative_eq!(e.value, 2.0);
        assert_relative_eq!(e.dz, 2.0);
        // Slope does not depend on z_t.
        let e2 = outer_linear(-7.0, 0.0, 0.5, 0.0).unwrap();
        assert_eq!(e.dz, e2.dz);
        assert!(outer_linear(0.0, 0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn onebit_at_origin_matches_mills_ratio() {
        // f(0, −1), s = 1 → p_G(0;1)/Q(0) = √(2/π).
        let e = outer_onebit(0.0, -1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(e.value, (2.0 / PI).sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn onebit_symmetry_on_a_grid() {
        for i in 0..81 {
            let z = -8.0 + 0.2 * i as f64;
            let plus = outer_onebit(z, 1.0, 0.7, 0.3).unwrap();
            let minus = outer_onebit(-z, -1.0, 0.7, 0.3).unwrap();
            assert_relative_eq!(plus.value, -minus.value, max_relative = 1e-14);
            assert_relative_eq!(plus.dz, minus.dz, max_relative = 1e-14);
        }
    }

    #[test]
    fn onebit_inverse_mills_asymptote() {
        // f(40, −1) with s = 1 ≈ 40 + 1/40 − 2/40³.
        let e = outer_onebit(40.0, -1.0, 1.0, 0.0).unwrap();
        let expect = 40.0 + 1.0 / 40.0 - 2.0 / 40.0f64.powi(3);
        assert_relative_eq!(e.value, expect, max_relative = 1e-7);
        // Sandwich |f(z,−1) − z| ≤ 2/z for z ≥ 10 at s = 1.
        for i in 0..60 {
            let z = 10.0 * 1.26f64.powi(i);
            if z > 1e6 {
                break;
            }
            let e = outer_onebit(z, -1.0, 1.0, 0.0).unwrap();
            assert!((e.value - z).abs() <= 2.0 / z, "z = {z}");
        }
    }

    #[test]
    fn onebit_never_produces_nan_or_inf_up_to_1e6() {
        for i in 0..=48 {
            let z = if i == 0 { 0.0 } else { 10f64.powf(-6.0 + 0.25 * i as f64) * 1e6 };
            for &zz in &[z, -z] {
                for &y in &[-1.0, 1.0] {
                    let e = outer_onebit(zz, y, 1.0, 0.0).unwrap();
                    assert!(e.value.is_finite(), "value at z={zz}, y={y}");
                    assert!(e.dz.is_finite() && e.dz >= 0.0, "dz at z={zz}, y={y}");
                }
            }
        }
    }

    #[test]
    fn onebit_dz_matches_finite_differences() {
        let s_cases = [(0.5, 0.5), (1.0, 0.0), (0.01, 0.0)];
        for &(v_in, sigma2) in &s_cases {
            let s: f64 = v_in + sigma2;
            for i in 0..65 {
                let z = (-8.0 + 0.25 * i as f64) * s.sqrt();
                let h = 1e-6 * z.abs().max(1.0);
                let f = |zz: f64| outer_onebit(zz, -1.0, v_in, sigma2).unwrap().value;
                let fd = (f(z + h) - f(z - h)) / (2.0 * h);
                let an = outer_onebit(z, -1.0, v_in, sigma2).unwrap().dz;
                assert!(
                    (fd - an).abs() / an.abs().max(1e-12) < 1e-5,
                    "z={z}, s={s}: fd={fd}, an={an}"
                );
            }
        }
    }

    #[test]
    fn onebit_collapsed_integral_matches_quadrature_oracle() {
        // ∫ p_G(z − z_t; v_in)·Q(z/σ) dz == Q(z_t/√(σ²+v_in)).
        let (v_in, sigma) = (0.4f64, 0.6f64);
        for &zt in &[-2.0, -0.3, 0.0, 1.1, 3.0] {
            let oracle = crate::quad::integrate_adaptive(
                |z: f64| {
                    crate::special::normal_pdf(z - zt, v_in) * gaussian_tail(z / sigma)
                },
                zt - 12.0 * v_in.sqrt(),
                zt + 12.0 * v_in.sqrt(),
                1e-13,
            )
            .unwrap();
            let collapsed = gaussian_tail(zt / (sigma * sigma + v_in).sqrt());
            assert_relative_eq!(oracle, collapsed, max_relative = 1e-9);
        }
    }

    #[test]
    fn onebit_rejects_bad_inputs() {
        assert!(outer_onebit(0.0, 0.5, 1.0, 0.0).is_err());
        assert!(outer_onebit(0.0, -1.0, 0.0, 0.0).is_err());
    }
}
