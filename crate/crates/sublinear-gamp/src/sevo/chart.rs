//! EXIT-like chart of the state-evolution recursion.
//!
//! In the chart coordinate x = 2·v̄_out/δ, the inner module contributes the
//! transfer curve φ(x) = E[U²·1(U² < x)] and the outer module the curve
//! ψ(x) = v̄_in solving x = 2·outer(v̄_in)/δ. Crossings of φ and ψ are the
//! fixed points of the recursion; for the linear channel ψ is the straight
//! line δx/2 − σ², for the 1-bit channel it is obtained by sweeping the
//! outer map forward on a v̄_in grid and re-parameterizing.

use super::{se_outer_onebit, truncated_second_moment, SevoError, DEFAULT_GH_ORDER};
use crate::model::{Channel, Prior};

/// Minimum grid size accepted by [`count_fixed_points`].
pub const MIN_GRID: usize = 1_000;
/// |ψ − φ| below this at a grid point with no sign change flags a tangency.
pub const TANGENCY_TOL: f64 = 1e-10;

/// Sampled chart curves on a common x grid.
#[derive(Debug, Clone)]
pub struct ChartCurves {
    pub x: Vec<f64>,
    pub phi: Vec<f64>,
    /// Outer curve; `None` where the re-parameterized map is undefined.
    pub psi: Vec<Option<f64>>,
    /// Whether (0, 0) is itself a fixed point (noiseless channels).
    pub origin_fixed_point: bool,
}

/// Fixed-point count from chart analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixedPointCount {
    pub count: usize,
    /// Set when a near-tangency was counted as a single fixed point.
    pub tangency: bool,
}

/// Log-spaced default grid covering everything up to just past the starting
/// point x₀ = 2·outer(P)/δ of the recursion.
pub fn default_grid(channel: &Channel, prior: &Prior, delta: f64) -> Result<Vec<f64>, SevoError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(SevoError::BadDelta(delta));
    }
    let p = if channel.is_one_bit() {
        1.0
    } else {
        prior.second_moment()
    };
    let x_hi = match channel {
        Channel::Linear { sigma2 } => 2.2 * (sigma2 + p) / delta,
        Channel::OneBitSign { sigma2 } => {
            2.2 * se_outer_onebit(1.0, *sigma2, DEFAULT_GH_ORDER)? / delta
        }
    };
    let x_lo = (1e-6_f64).min(x_hi / 1e3);
    let n = 2_048;
    let (la, lb) = (x_lo.ln(), x_hi.ln());
    let mut grid: Vec<f64> = (0..n)
        .map(|i| (la + (lb - la) * i as f64 / (n - 1) as f64).exp())
        .collect();
    // φ for a discrete prior is a step function: cluster points around each
    // jump at u² so crossings just past a step are resolved far below the
    // base grid spacing (the weak-threshold bisection depends on this).
    let effective = if channel.is_one_bit() {
        prior.rescaled_to_unit_power()?
    } else {
        prior.clone()
    };
    let jumps: Vec<f64> = match &effective {
        Prior::Gaussian { .. } => Vec::new(),
        Prior::ConstantAmplitude { amplitude } => vec![amplitude * amplitude],
        Prior::DiscreteMixture { points } => points.iter().map(|&(u, _)| u * u).collect(),
    };
    for m in jumps {
        for e in 2..=12 {
            let eps = 10f64.powi(-e);
            for cand in [m * (1.0 - eps), m * (1.0 + eps)] {
                if cand > x_lo && cand < x_hi {
                    grid.push(cand);
                }
            }
        }
    }
    grid.sort_by(|a, b| a.partial_cmp(b).expect("grid values are finite"));
    grid.dedup();
    Ok(grid)
}

/// Sample φ and ψ on `grid` (strictly increasing, positive).
pub fn exit_chart(
    channel: &Channel,
    prior: &Prior,
    delta: f64,
    grid: &[f64],
) -> Result<ChartCurves, SevoError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(SevoError::BadDelta(delta));
    }
    if grid.is_empty() || grid[0] <= 0.0 || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SevoError::BadGrid);
    }
    let prior = super::normalize_prior_for(channel, prior)?;
    let phi = grid
        .iter()
        .map(|&x| truncated_second_moment(&prior, x))
        .collect::<Result<Vec<_>, _>>()?;
    let psi = match channel {
        Channel::Linear { sigma2 } => grid
            .iter()
            .map(|&x| Some(0.5 * delta * x - sigma2))
            .collect(),
        Channel::OneBitSign { sigma2 } => onebit_psi(*sigma2, delta, grid)?,
    };
    Ok(ChartCurves {
        x: grid.to_vec(),
        phi,
        psi,
        origin_fixed_point: channel.sigma2() == 0.0,
    })
}

/// Forward-sweep the 1-bit outer map on a v̄_in grid and re-parameterize
/// onto the requested x grid by monotone linear interpolation.
fn onebit_psi(sigma2: f64, delta: f64, grid: &[f64]) -> Result<Vec<Option<f64>>, SevoError> {
    const SWEEP: usize = 4_096;
    const V_LO: f64 = 1e-14;
    let mut xs: Vec<f64> = Vec::with_capacity(SWEEP + 1);
    let mut ys: Vec<f64> = Vec::with_capacity(SWEEP + 1);
    let push = |v: f64, xs: &mut Vec<f64>, ys: &mut Vec<f64>| -> Result<(), SevoError> {
        let vo = se_outer_onebit(v, sigma2, DEFAULT_GH_ORDER)?;
        let x = 2.0 * vo / delta;
        // The outer map is non-decreasing in v̄_in; drop any numerically
        // stale sample so the interpolation table stays strictly monotone.
        if xs.last().map_or(true, |&last| x > last) {
            xs.push(x);
            ys.push(v);
        }
        Ok(())
    };
    if sigma2 > 0.0 {
        push(0.0, &mut xs, &mut ys)?;
    }
    for i in 0..SWEEP {
        let t = i as f64 / (SWEEP - 1) as f64;
        let v = (V_LO.ln() * (1.0 - t)).exp();
        push(v, &mut xs, &mut ys)?;
    }
    let (x_min, x_max) = (xs[0], *xs.last().expect("sweep not empty"));
    Ok(grid
        .iter()
        .map(|&x| {
            if x < x_min || x > x_max {
                // Noiseless channels continue ψ to the origin exactly.
                if sigma2 == 0.0 && x < x_min {
                    return Some(x / x_min * ys[0]);
                }
                return None;
            }
            let j = xs.partition_point(|&xv| xv < x);
            if j == 0 {
                return Some(ys[0]);
            }
            let (x0, x1) = (xs[j - 1], xs[j.min(xs.len() - 1)]);
            let (y0, y1) = (ys[j - 1], ys[j.min(ys.len() - 1)]);
            if x1 == x0 {
                Some(y0)
            } else {
                Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
            }
        })
        .collect())
}

/// Count fixed points: sign changes of ψ − φ across the grid interior, a
/// tangency (touch without crossing) counted once, plus the boundary fixed
/// point at the origin when the channel is noiseless.
pub fn count_fixed_points(curves: &ChartCurves) -> Result<FixedPointCount, SevoError> {
    if curves.x.len() < MIN_GRID {
        return Err(SevoError::GridTooCoarse {
            min: MIN_GRID,
            got: curves.x.len(),
        });
    }
    // (ψ − φ, curve magnitude) on the sub-grid where ψ is defined. The
    // magnitude gates tangency detection: near the origin both curves tend
    // to zero together, and an absolute 1e-10 test alone would misread that
    // approach as a tangency.
    let pairs: Vec<(f64, f64)> = curves
        .psi
        .iter()
        .zip(&curves.phi)
        .filter_map(|(psi, &phi)| psi.map(|p| (p - phi, p.abs() + phi.abs())))
        .collect();
    let mut count = 0usize;
    let mut tangency = false;
    let mut touched = false;
    let mut prev: Option<f64> = None;
    for &(d, scale) in &pairs {
        if let Some(p) = prev {
            let crossing = (p < 0.0 && d >= 0.0) || (p > 0.0 && d <= 0.0);
            if crossing {
                count += 1;
                touched = true;
            } else if d.abs() < TANGENCY_TOL && d.abs() < 0.01 * scale && !touched {
                count += 1;
                tangency = true;
                touched = true;
            } else if d.abs() >= TANGENCY_TOL {
                touched = false;
            }
        }
        prev = Some(d);
    }
    if curves.origin_fixed_point {
        count += 1;
    }
    Ok(FixedPointCount { count, tangency })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn gaussian() -> Prior {
        Prior::gaussian(1.0).unwrap()
    }

    #[test]
    fn phi_starts_at_zero_for_every_prior() {
        let ch = Channel::linear(0.0).unwrap();
        for prior in [
            gaussian(),
            Prior::constant_amplitude(1.0).unwrap(),
            Prior::discrete_mixture(vec![(0.5, 0.5), (-2.0, 0.5)]).unwrap(),
        ] {
            let grid = default_grid(&ch, &prior, 1.0).unwrap();
            let curves = exit_chart(&ch, &prior, 1.0, &grid).unwrap();
            assert!(curves.phi[0] < 1e-6);
            // φ is non-decreasing and bounded by P (1 after rescale).
            assert!(curves.phi.windows(2).all(|w| w[1] >= w[0]));
        }
    }

    #[test]
    fn phi_below_identity_for_positive_min_amplitude() {
        let prior = Prior::discrete_mixture(vec![(0.7, 0.3), (-1.2, 0.7)]).unwrap();
        let ch = Channel::linear(0.1).unwrap();
        let grid = default_grid(&ch, &prior, 1.0).unwrap();
        let curves = exit_chart(&ch, &prior, 1.0, &grid).unwrap();
        for (x, phi) in curves.x.iter().zip(&curves.phi) {
            assert!(*phi <= *x + 1e-12, "phi({x}) = {phi}");
        }
    }

    #[test]
    fn linear_psi_is_the_stated_line() {
        let ch = Channel::linear(0.25).unwrap();
        let grid = default_grid(&ch, &gaussian(), 2.0).unwrap();
        let curves = exit_chart(&ch, &gaussian(), 2.0, &grid).unwrap();
        for (x, psi) in curves.x.iter().zip(&curves.psi) {
            assert_relative_eq!(psi.unwrap(), x - 0.25, max_relative = 1e-12);
        }
        assert!(!curves.origin_fixed_point);
    }

    #[test]
    fn linear_gaussian_40db_has_single_crossing_at_moderate_delta() {
        let ch = Channel::linear(1e-4).unwrap();
        // Spec example grid [1e-6, 1] at δ = 1.5: exactly one crossing.
        let grid: Vec<f64> = (0..2000)
            .map(|i| (1e-6f64.ln() + (0.0 - 1e-6f64.ln()) * i as f64 / 1999.0).exp())
            .collect();
        let curves = exit_chart(&ch, &gaussian(), 1.5, &grid).unwrap();
        let fp = count_fixed_points(&curves).unwrap();
        assert_eq!(fp.count, 1);
    }

    #[test]
    fn onebit_noiseless_has_two_fixed_points() {
        let ch = Channel::one_bit_sign(0.0).unwrap();
        for &d in &[1.0, 2.0, 4.0] {
            let grid = default_grid(&ch, &gaussian(), d).unwrap();
            let curves = exit_chart(&ch, &gaussian(), d, &grid).unwrap();
            let fp = count_fixed_points(&curves).unwrap();
            assert_eq!(fp.count, 2, "delta = {d}");
            assert!(curves.origin_fixed_point);
        }
    }

    #[test]
    fn onebit_psi_is_monotone_on_its_domain() {
        let ch = Channel::one_bit_sign(0.0).unwrap();
        let grid = default_grid(&ch, &gaussian(), 2.0).unwrap();
        let curves = exit_chart(&ch, &gaussian(), 2.0, &grid).unwrap();
        let defined: Vec<f64> = curves.psi.iter().flatten().copied().collect();
        assert!(defined.len() > MIN_GRID / 2);
        assert!(defined.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn separated_curves_have_no_interior_crossing() {
        let n = MIN_GRID + 1;
        let x: Vec<f64> = (1..=n).map(|i| i as f64 / n as f64).collect();
        let phi: Vec<f64> = x.iter().map(|&v| 0.1 * v).collect();
        let psi: Vec<Option<f64>> = x.iter().map(|&v| Some(0.9 * v + 0.05)).collect();
        let curves = ChartCurves {
            x,
            phi,
            psi,
            origin_fixed_point: false,
        };
        assert_eq!(count_fixed_points(&curves).unwrap().count, 0);
    }

    #[test]
    fn tangency_is_counted_once_and_flagged() {
        // Grid hits x = 1.0 exactly, where the parabola touches φ.
        let x: Vec<f64> = (1..=MIN_GRID).map(|i| i as f64 * 0.002).collect();
        let phi: Vec<f64> = x.iter().map(|_| 1.0).collect();
        let psi: Vec<Option<f64>> = x
            .iter()
            .map(|&v| Some(1.0 + (v - 1.0) * (v - 1.0) + 1e-12))
            .collect();
        let curves = ChartCurves {
            x,
            phi,
            psi,
            origin_fixed_point: false,
        };
        let fp = count_fixed_points(&curves).unwrap();
        assert_eq!(fp.count, 1);
        assert!(fp.tangency);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let x: Vec<f64> = (1..100).map(|i| i as f64).collect();
        let curves = ChartCurves {
            phi: vec![0.0; x.len()],
            psi: vec![Some(1.0); x.len()],
            x,
            origin_fixed_point: false,
        };
        assert!(matches!(
            count_fixed_points(&curves),
            Err(SevoError::GridTooCoarse { .. })
        ));
    }
}
