//! Orthogonal matching pursuit: greedy atom selection by residual
//! correlation with a full least-squares refit on the selected support
//! each round.

use ndarray::{Array1, Array2};

use super::BaselineError;

#[derive(Debug, Clone)]
pub struct OmpResult {
    pub x_hat: Array1<f64>,
    /// Selected atoms in selection order.
    pub support: Vec<usize>,
    pub residual_norm: f64,
    /// Set when the selected columns were rank-deficient and the refit fell
    /// back to a ridge-regularized solve.
    pub rank_deficient: bool,
}

/// Relative residual threshold for early stopping.
const RESIDUAL_STOP: f64 = 1e-12;

/// Solve G·c = b for symmetric positive definite G by Cholesky; falls back
/// to a ridge-regularized factorization when a pivot collapses.
fn solve_spd(g: &Array2<f64>, b: &Array1<f64>) -> (Array1<f64>, bool) {
    let n = b.len();
    let try_chol = |g: &Array2<f64>| -> Option<Array2<f64>> {
        let mut l = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let mut sum = g[[i, j]];
                for p in 0..j {
                    sum -= l[[i, p]] * l[[j, p]];
                }
                if i == j {
                    if sum <= 0.0 {
                        return None;
                    }
                    l[[i, i]] = sum.sqrt();
                } else {
                    l[[i, j]] = sum / l[[j, j]];
                }
            }
        }
        Some(l)
    };
    let (l, deficient) = match try_chol(g) {
        Some(l) => (l, false),
        None => {
            let scale = (0..n).map(|i| g[[i, i]]).fold(0.0f64, f64::max).max(1.0);
            let mut ridged = g.clone();
            for i in 0..n {
                ridged[[i, i]] += 1e-10 * scale;
            }
            (
                try_chol(&ridged).expect("ridge-regularized Gram is positive definite"),
                true,
            )
        }
    };
    // Forward then backward substitution.
    let mut y = Array1::<f64>::zeros(n);
    for i in 0..n {
        let mut sum = b[i];
        for p in 0..i {
            sum -= l[[i, p]] * y[p];
        }
        y[i] = sum / l[[i, i]];
    }
    let mut x = Array1::<f64>::zeros(n);
    for i in (0..n).rev() {
        let mut sum = y[i];
        for p in i + 1..n {
            sum -= l[[p, i]] * x[p];
        }
        x[i] = sum / l[[i, i]];
    }
    (x, deficient)
}

/// Run OMP for `k` rounds (or until the residual is negligible).
pub fn omp(a: &Array2<f64>, y: &Array1<f64>, k: usize) -> Result<OmpResult, BaselineError> {
    let (m, n) = a.dim();
    if y.len() != m {
        return Err(BaselineError::DimensionMismatch { m, n, len: y.len() });
    }
    if k > m.min(n) {
        return Err(BaselineError::BadSparsityTarget { k, limit: m.min(n) });
    }
    let y_norm = y.dot(y).sqrt();
    let mut support: Vec<usize> = Vec::with_capacity(k);
    let mut residual = y.clone();
    let mut coeffs = Array1::<f64>::zeros(0);
    let mut rank_deficient = false;

    for _ in 0..k {
        if residual.dot(&residual).sqrt() <= RESIDUAL_STOP * y_norm {
            break;
        }
        // Highest absolute correlation, lowest index on ties.
        let mut best = usize::MAX;
        let mut best_corr = -1.0;
        for j in 0..n {
            if support.contains(&j) {
                continue;
            }
            let corr = a.column(j).dot(&residual).abs();
            if corr > best_corr {
                best_corr = corr;
                best = j;
            }
        }
        if best == usize::MAX {
            break;
        }
        support.push(best);

        // Least-squares refit on the selected support via normal equations.
        let s = support.len();
        let mut gram = Array2::<f64>::zeros((s, s));
        let mut rhs = Array1::<f64>::zeros(s);
        for (i, &ci) in support.iter().enumerate() {
            rhs[i] = a.column(ci).dot(y);
            for (j, &cj) in support.iter().enumerate().take(i + 1) {
                let g = a.column(ci).dot(&a.column(cj));
                gram[[i, j]] = g;
                gram[[j, i]] = g;
            }
        }
        let (c, deficient) = solve_spd(&gram, &rhs);
        rank_deficient |= deficient;
        coeffs = c;

        residual = y.clone();
        for (i, &ci) in support.iter().enumerate() {
            residual.scaled_add(-coeffs[i], &a.column(ci).to_owned());
        }
    }

    let mut x_hat = Array1::<f64>::zeros(n);
    for (i, &ci) in support.iter().enumerate() {
        x_hat[ci] = coeffs[i];
    }
    Ok(OmpResult {
        x_hat,
        support,
        residual_norm: residual.dot(&residual).sqrt(),
        rank_deficient,
    })
}
