//! Numerical integration: Gauss-Hermite rules and adaptive Gauss-Legendre.
//!
//! Gauss-Hermite nodes and weights are found by Newton iteration on the
//! orthonormal Hermite recurrence (the usual Golub-Welsch alternative),
//! which stays well-conditioned up to rules with thousands of nodes. Rules
//! are cached globally, keyed by order, since state evolution evaluates the
//! same rule many thousands of times.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not reach the requested tolerance (residual {residual:e})")]
    NoConvergence { residual: f64 },
    #[error("quadrature order must be at least 1, got {0}")]
    BadOrder(usize),
}

/// A Gauss-Hermite rule: ∫ e^{−t²} f(t) dt ≈ Σ w_i f(t_i).
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pairs: Arc<Vec<(f64, f64)>>,
}

fn hermite_cache() -> &'static Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<(f64, f64)>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

const RESCALE: f64 = 1e150;

/// Value and derivative of the orthonormal Hermite polynomial of degree `n`,
/// jointly rescaled by RESCALE^exp. Outside the oscillatory region the
/// recurrence grows like e^(n·c) and would overflow near the extreme roots
/// of high-order rules; the common scale cancels in Newton ratios and is
/// reapplied logarithmically for weights.
fn hermite_ortho(n: usize, x: f64) -> (f64, f64, i32) {
    let mut p0 = PI.powf(-0.25);
    if n == 0 {
        return (p0, 0.0, 0);
    }
    let mut p1 = std::f64::consts::SQRT_2 * x * p0;
    let mut exp = 0i32;
    for j in 1..n {
        let jf = j as f64;
        let p2 = x * (2.0 / (jf + 1.0)).sqrt() * p1 - (jf / (jf + 1.0)).sqrt() * p0;
        p0 = p1;
        p1 = p2;
        if p0.abs().max(p1.abs()) > RESCALE {
            p0 /= RESCALE;
            p1 /= RESCALE;
            exp += 1;
        }
    }
    let dp = (2.0 * n as f64).sqrt() * p0;
    (p1, dp, exp)
}

/// Number of Gauss-Hermite nodes strictly below `x`: the Sturm count of the
/// Jacobi matrix (zero diagonal, off-diagonals √(j/2)).
fn sturm_count(n: usize, x: f64) -> usize {
    let mut d = -x;
    let mut count = (d < 0.0) as usize;
    for j in 1..n {
        let b2 = j as f64 / 2.0;
        if d == 0.0 {
            d = 1e-300;
        }
        d = -x - b2 / d;
        count += (d < 0.0) as usize;
    }
    count
}

fn compute_hermite(n: usize) -> Vec<(f64, f64)> {
    let mut pairs = vec![(0.0, 0.0); n];
    let m = (n + 1) / 2;
    let bound = (2.0 * n as f64 + 1.0).sqrt();
    // Positive roots, largest first: the (n−1−i)-th eigenvalue (ascending)
    // of the Jacobi matrix, bracketed by Sturm bisection and polished by a
    // few Newton steps.
    for i in 0..m {
        let target = n - 1 - i;
        let (mut lo, mut hi) = (-1e-3, bound);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if sturm_count(n, mid) <= target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * (1.0 + hi.abs()) {
                break;
            }
        }
        let mut z = 0.5 * (lo + hi);
        for _ in 0..8 {
            let (p, dp, _) = hermite_ortho(n, z);
            let dz = p / dp;
            if !dz.is_finite() {
                break;
            }
            z -= dz;
            if dz.abs() < 1e-15 * (1.0 + z.abs()) {
                break;
            }
        }
        let (_, dp, exp) = hermite_ortho(n, z);
        // w = 2/dp_true² with dp_true = dp·RESCALE^exp, via logs so extreme
        // nodes underflow to zero weight instead of corrupting the rule.
        let ln_w = std::f64::consts::LN_2 - 2.0 * (dp.abs().ln() + exp as f64 * RESCALE.ln());
        let w = ln_w.exp();
        pairs[i] = (z, w);
        pairs[n - 1 - i] = (-z, w);
    }
    if n % 2 == 1 {
        // Enforce the exact central node for odd orders.
        pairs[m - 1].0 = 0.0;
    }
    // Ascending node order.
    pairs.reverse();
    pairs
}

impl GaussHermite {
    pub fn new(order: usize) -> Result<Self, QuadError> {
        if order == 0 {
            return Err(QuadError::BadOrder(0));
        }
        let mut cache = hermite_cache().lock().expect("hermite cache poisoned");
        let pairs = cache
            .entry(order)
            .or_insert_with(|| Arc::new(compute_hermite(order)))
            .clone();
        Ok(Self { pairs })
    }

    pub fn order(&self) -> usize {
        self.pairs.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.pairs.iter().copied()
    }

    /// ∫ e^{−t²} f(t) dt.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.pairs.iter().map(|&(x, w)| w * f(x)).sum()
    }

    /// E[f(X)] for X ~ N(mean, var). Degenerates cleanly to f(mean) at var = 0.
    pub fn expectation_normal<F: FnMut(f64) -> f64>(&self, mean: f64, var: f64, mut f: F) -> f64 {
        let s = (2.0 * var.max(0.0)).sqrt();
        self.pairs
            .iter()
            .map(|&(x, w)| w * f(mean + s * x))
            .sum::<f64>()
            / PI.sqrt()
    }
}

// 15-point Gauss-Legendre on [-1, 1], used as the panel rule of the adaptive
// integrator. Computed once by Newton on the Legendre recurrence.
fn legendre15() -> &'static Vec<(f64, f64)> {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = 15usize;
        let nf = n as f64;
        let mut pairs = vec![(0.0, 0.0); n];
        for i in 0..(n + 1) / 2 {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            loop {
                let mut p0 = 1.0;
                let mut p1 = z;
                for j in 1..n {
                    let jf = j as f64;
                    let p2 = ((2.0 * jf + 1.0) * z * p1 - jf * p0) / (jf + 1.0);
                    p0 = p1;
                    p1 = p2;
                }
                let dp = nf * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    let w = 2.0 / ((1.0 - z * z) * dp * dp);
                    pairs[i] = (-z, w);
                    pairs[n - 1 - i] = (z, w);
                    break;
                }
            }
        }
        pairs
    })
}

fn panel<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    legendre15().iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}

fn adaptive_rec<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64, QuadError> {
    let m = 0.5 * (a + b);
    let left = panel(f, a, m);
    let right = panel(f, m, b);
    let delta = left + right - whole;
    if delta.abs() <= tol || delta.abs() <= 1e-16 * (left.abs() + right.abs()) {
        return Ok(left + right + delta);
    }
    if depth == 0 {
        return Err(QuadError::NoConvergence {
            residual: delta.abs(),
        });
    }
    let half = 0.5 * tol;
    Ok(adaptive_rec(f, a, m, left, half, depth - 1)?
        + adaptive_rec(f, m, b, right, half, depth - 1)?)
}

/// Adaptive Gauss-Legendre integration of `f` over [a, b] to absolute
/// tolerance `tol` (halved on each bisection so the panel errors sum).
pub fn integrate_adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    let whole = panel(&mut f, a, b);
    adaptive_rec(&mut f, a, b, whole, tol.max(1e-300), 48)
}
