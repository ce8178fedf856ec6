//! Error metrics for recovered signals.

use ndarray::Array1;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("length mismatch: estimate has {got}, reference has {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("reference signal has zero norm")]
    ZeroReference,
}

/// Unnormalized square error ‖x̂ − x‖².
pub fn metric_unnormalized(x_hat: &Array1<f64>, x: &Array1<f64>) -> Result<f64, MetricError> {
    if x_hat.len() != x.len() {
        return Err(MetricError::LengthMismatch {
            got: x_hat.len(),
            want: x.len(),
        });
    }
    Ok(x_hat
        .iter()
        .zip(x.iter())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum())
}

/// Squared norm of the normalized error ‖x/‖x‖ − x̂/‖x̂‖‖² ∈ [0, 4].
///
/// A zero estimate carries no direction; by convention it scores 2, the
/// value midway to the antipodal worst case.
pub fn metric_normalized(x_hat: &Array1<f64>, x: &Array1<f64>) -> Result<f64, MetricError> {
    if x_hat.len() != x.len() {
        return Err(MetricError::LengthMismatch {
            got: x_hat.len(),
            want: x.len(),
        });
    }
    let nx = x.dot(x).sqrt();
    if nx == 0.0 {
        return Err(MetricError::ZeroReference);
    }
    let nh = x_hat.dot(x_hat).sqrt();
    if nh == 0.0 {
        return Ok(2.0);
    }
    // 2(1 − cosθ) evaluated without forming the normalized difference.
    let cos = x_hat.dot(x) / (nx * nh);
    Ok((2.0 - 2.0 * cos).clamp(0.0, 4.0))
}

/// Whether the k largest-magnitude entries of the estimate coincide with
/// the true support (as a set), with k the support size.
pub fn support_recovered(x_hat: &Array1<f64>, support: &[usize]) -> bool {
    let k = support.len();
    if k == 0 || k > x_hat.len() {
        return false;
    }
    let mut idx: Vec<usize> = (0..x_hat.len()).collect();
    idx.sort_by(|&i, &j| {
        x_hat[j]
            .abs()
            .partial_cmp(&x_hat[i].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(i.cmp(&j))
    });
    let mut top: Vec<usize> = idx.into_iter().take(k).collect();
    top.sort_unstable();
    let mut want = support.to_vec();
    want.sort_unstable();
    top == want
}
