//! Binary iterative hard thresholding for 1-bit measurements.

use ndarray::{Array1, Array2};

use super::BaselineError;

#[derive(Debug, Clone)]
pub struct BihtConfig {
    pub k: usize,
    pub max_iters: usize,
    /// Gradient step size τ.
    pub step: f64,
}

impl BihtConfig {
    pub fn new(k: usize, max_iters: usize) -> Result<Self, BaselineError> {
        if k == 0 {
            return Err(BaselineError::BadSparsityTarget { k, limit: 0 });
        }
        Ok(Self {
            k,
            max_iters,
            step: 1.0,
        })
    }
}

fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Keep the k largest-magnitude entries, zeroing the rest. Ties break
/// toward the lowest index.
pub(crate) fn hard_threshold(x: &Array1<f64>, k: usize) -> Array1<f64> {
    let n = x.len();
    if k >= n {
        return x.clone();
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| {
        x[j].abs()
            .partial_cmp(&x[i].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut out = Array1::zeros(n);
    for &i in idx.iter().take(k) {
        out[i] = x[i];
    }
    out
}

/// Iterate x ← HT_k(x + (τ/M)·Aᵀ(y − sign(Ax))), normalizing to unit norm
/// each round; the all-zero vector is returned unnormalized.
pub fn biht(
    a: &Array2<f64>,
    y: &Array1<f64>,
    cfg: &BihtConfig,
) -> Result<Array1<f64>, BaselineError> {
    let (m, n) = a.dim();
    if y.len() != m {
        return Err(BaselineError::DimensionMismatch { m, n, len: y.len() });
    }
    for (i, &v) in y.iter().enumerate() {
        if v != 1.0 && v != -1.0 {
            return Err(BaselineError::BadBinaryObservation(v, i));
        }
    }
    if cfg.k == 0 || !(cfg.step.is_finite() && cfg.step > 0.0) {
        return Err(BaselineError::BadStep(cfg.step));
    }
    let mut x = Array1::<f64>::zeros(n);
    for _ in 0..cfg.max_iters {
        let consistent = crate::linalg::mat_vec(a, &x).mapv(sign);
        let residual = y - &consistent;
        let grad = crate::linalg::mat_t_vec(a, &residual) * (cfg.step / m as f64);
        x = hard_threshold(&(&x + &grad), cfg.k);
        let norm = x.dot(&x).sqrt();
        if norm > 0.0 {
            x.mapv_inplace(|v| v / norm);
        }
    }
    Ok(x)
}
