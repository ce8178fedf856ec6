//! FISTA for the Lasso objective (1/2M)·‖y − Ax‖² + λ‖x‖₁, with
//! backtracking line search on the smooth part and gradient-based restart
//! of the momentum sequence.

use ndarray::{Array1, Array2};

use super::BaselineError;

#[derive(Debug, Clone)]
pub struct FistaConfig {
    pub lambda: f64,
    pub max_iters: usize,
    /// Step shrink factor in (0, 1) used by the line search.
    pub backtracking: f64,
    /// Initial step size (inverse initial Lipschitz estimate).
    pub initial_step: f64,
    /// Momentum restart: gradient-based, plus a monotonicity guard that
    /// rejects and restarts any step that would raise the objective.
    pub restart: bool,
}

impl FistaConfig {
    pub fn new(lambda: f64, max_iters: usize) -> Result<Self, BaselineError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(BaselineError::BadLambda(lambda));
        }
        Ok(Self {
            lambda,
            max_iters,
            backtracking: 0.5,
            initial_step: 1.0,
            restart: true,
        })
    }

    fn validate(&self) -> Result<(), BaselineError> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(BaselineError::BadLambda(self.lambda));
        }
        if !(self.backtracking > 0.0 && self.backtracking < 1.0) {
            return Err(BaselineError::BadBacktracking(self.backtracking));
        }
        if !(self.initial_step.is_finite() && self.initial_step > 0.0) {
            return Err(BaselineError::BadStep(self.initial_step));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct FistaResult {
    pub x_hat: Array1<f64>,
    /// Objective value after each iteration.
    pub objective: Vec<f64>,
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// Default regularization weight √(0.8·σ²·ln(N)/M).
pub fn lambda_default(sigma2: f64, m: usize, n: usize) -> Result<f64, BaselineError> {
    if !(sigma2.is_finite() && sigma2 > 0.0) {
        return Err(BaselineError::BadNoiseVariance(sigma2));
    }
    Ok((0.8 * sigma2 * (n as f64).ln() / m as f64).sqrt())
}

/// Minimize (1/2·m_scale)·‖y − Ax‖² + λ‖x‖₁ from x₀ = 0.
pub fn fista(
    a: &Array2<f64>,
    y: &Array1<f64>,
    cfg: &FistaConfig,
    m_scale: f64,
) -> Result<FistaResult, BaselineError> {
    fista_traced(a, y, cfg, m_scale, |_, _| {})
}

/// Same as [`fista`] but invokes `on_iterate(t, x_t)` after each iteration,
/// for per-iteration error traces.
pub fn fista_traced(
    a: &Array2<f64>,
    y: &Array1<f64>,
    cfg: &FistaConfig,
    m_scale: f64,
    mut on_iterate: impl FnMut(usize, &Array1<f64>),
) -> Result<FistaResult, BaselineError> {
    cfg.validate()?;
    let (m, n) = a.dim();
    if y.len() != m {
        return Err(BaselineError::DimensionMismatch { m, n, len: y.len() });
    }
    let lam = cfg.lambda;
    let l1 = |x: &Array1<f64>| -> f64 { x.iter().map(|v| v.abs()).sum::<f64>() };
    // ½‖ax − y‖²/M from a cached product ax = A·x.
    let smooth_of = |ax: &Array1<f64>| -> f64 {
        ax.iter()
            .zip(y.iter())
            .map(|(&p, &q)| (p - q) * (p - q))
            .sum::<f64>()
            * 0.5
            / m_scale
    };

    let mut x = Array1::<f64>::zeros(n);
    let mut z = x.clone();
    // Forward products of the current iterate and of the momentum point are
    // maintained across iterations: z is always an affine combination of
    // the last two iterates, so A·z never needs its own product.
    let mut ax = Array1::<f64>::zeros(m);
    let mut az = Array1::<f64>::zeros(m);
    let mut t_momentum = 1.0f64;
    let mut lip = 1.0 / cfg.initial_step;
    let mut obj_curr = smooth_of(&ax) + lam * l1(&x);
    let mut trace = Vec::with_capacity(cfg.max_iters);

    for _ in 0..cfg.max_iters {
        let fz = smooth_of(&az);
        let residual = Array1::from_iter(az.iter().zip(y.iter()).map(|(&p, &q)| p - q));
        let grad = crate::linalg::mat_t_vec(a, &residual) / m_scale;
        // Backtracking: grow the Lipschitz estimate until the quadratic
        // upper bound holds at the prox point.
        let (x_next, ax_next, f_next) = loop {
            let step = 1.0 / lip;
            if step < 1e-30 {
                return Err(BaselineError::StepUnderflow);
            }
            let cand = Array1::from_iter(
                z.iter()
                    .zip(grad.iter())
                    .map(|(&zi, &gi)| soft_threshold(zi - step * gi, lam * step)),
            );
            let a_cand = crate::linalg::mat_vec(a, &cand);
            let d = &cand - &z;
            let quad = fz + grad.dot(&d) + 0.5 * lip * d.dot(&d);
            let f_cand = smooth_of(&a_cand);
            if f_cand <= quad + 1e-12 * quad.abs().max(1.0) {
                break (cand, a_cand, f_cand);
            }
            lip /= cfg.backtracking;
        };

        let obj_next = f_next + lam * l1(&x_next);
        if cfg.restart && obj_next > obj_curr {
            // Momentum overshot: reject the move and restart from x. The
            // following iteration is then a plain proximal step, which the
            // line search makes a descent step.
            z.assign(&x);
            az.assign(&ax);
            t_momentum = 1.0;
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t_momentum * t_momentum).sqrt());
            let diff = &x_next - &x;
            if cfg.restart && grad.dot(&diff) > 0.0 {
                // Gradient opposes the step taken: drop the momentum.
                z.assign(&x_next);
                az.assign(&ax_next);
                t_momentum = 1.0;
            } else {
                let beta = (t_momentum - 1.0) / t_next;
                z = &x_next + &(&diff * beta);
                az = Array1::from_iter(
                    ax_next
                        .iter()
                        .zip(ax.iter())
                        .map(|(&new, &old)| new + beta * (new - old)),
                );
                t_momentum = t_next;
            }
            x = x_next;
            ax = ax_next;
            obj_curr = obj_next;
        }
        trace.push(obj_curr);
        on_iterate(trace.len(), &x);
    }
    Ok(FistaResult {
        x_hat: x,
        objective: trace,
    })
}

/// Generalized Lasso for 1-bit observations: runs FISTA on the ±1 vector as
/// if it were the linear observation. Output is identical to [`fista`] on
/// identical inputs.
pub fn glasso(
    a: &Array2<f64>,
    y: &Array1<f64>,
    cfg: &FistaConfig,
    m_scale: f64,
) -> Result<FistaResult, BaselineError> {
    for (i, &v) in y.iter().enumerate() {
        if v != 1.0 && v != -1.0 {
            return Err(BaselineError::BadBinaryObservation(v, i));
        }
    }
    fista(a, y, cfg, m_scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{sample_matrix, sample_signal, Prior, ProblemDims};
    use approx::assert_relative_eq;
    use ndarray::array;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn lambda_default_formula_and_scalings() {
        // σ²=1e-4, M=100, N=e^10 → √(0.8·1e-4·10/100).
        let n = (10.0f64).exp().round() as usize;
        let lam = lambda_default(1e-4, 100, n).unwrap();
        let lnn = (n as f64).ln();
        assert_relative_eq!(lam, (0.8e-4 * lnn / 100.0).sqrt(), max_relative = 1e-12);
        // 1/√M scaling and doubling under 4× noise.
        let l1 = lambda_default(1e-2, 100, 4096).unwrap();
        let l2 = lambda_default(1e-2, 400, 4096).unwrap();
        assert_relative_eq!(l1 / l2, 2.0, max_relative = 1e-12);
        let l4 = lambda_default(4e-2, 100, 4096).unwrap();
        assert_relative_eq!(l4 / l1, 2.0, max_relative = 1e-12);
        assert!(lambda_default(0.0, 10, 10).is_err());
    }

    #[test]
    fn large_lambda_yields_exact_zero() {
        let a = array![[1.0, -2.0], [3.0, 0.5], [0.25, 1.0]];
        let y = array![1.0, -1.0, 0.5];
        let m = 3.0;
        let linf = (0..2)
            .map(|j| (a.column(j).dot(&y) / m as f64).abs())
            .fold(0.0f64, f64::max);
        let cfg = FistaConfig::new(linf * 1.001, 50).unwrap();
        let r = fista(&a, &y, &cfg, m).unwrap();
        assert!(r.x_hat.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn scalar_lasso_matches_closed_form() {
        // N = 1: x̂ = soft(aᵀy, λM)/‖a‖².
        let a = array![[0.8], [-1.3], [0.4], [2.0]];
        let y = array![1.0, 0.2, -0.7, 1.5];
        let m = 4.0;
        let lam = 0.05;
        let cfg = FistaConfig::new(lam, 400).unwrap();
        let r = fista(&a, &y, &cfg, m).unwrap();
        let aty = a.column(0).dot(&y);
        let closed = soft_threshold(aty, lam * m) / a.column(0).dot(&a.column(0));
        assert!((r.x_hat[0] - closed).abs() < 1e-8, "{} vs {closed}", r.x_hat[0]);
    }

    #[test]
    fn objective_settles_and_subgradient_condition_holds() {
        let dims = ProblemDims::new(128, 4, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = sample_matrix(&dims, &mut rng);
        let sig = sample_signal(&dims, &Prior::gaussian(1.0).unwrap(), &mut rng);
        let y = a.dot(&sig.x);
        let m = dims.m() as f64;
        let cfg = FistaConfig::new(5e-3, 600).unwrap();
        let r = fista(&a, &y, &cfg, m).unwrap();
        // Sampled decimation of the trace is non-increasing after warmup.
        let obj = &r.objective;
        for t in 1..obj.len() / 10 {
            assert!(
                obj[10 * t] <= obj[10 * (t - 1)] + 1e-12,
                "objective rose at iteration {}",
                10 * t
            );
        }
        // Final objective beats the zero vector.
        let obj0 = 0.5 * y.dot(&y) / m;
        assert!(*obj.last().unwrap() <= obj0);
        // KKT: ‖(1/M)Aᵀ(Ax̂ − y)‖_∞ ≤ λ(1 + 1e-3).
        let g = a.t().dot(&(&a.dot(&r.x_hat) - &y)) / m;
        let ginf = g.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(ginf <= cfg.lambda * 1.001, "ginf = {ginf}");
    }

    #[test]
    fn glasso_is_bit_identical_to_fista() {
        let dims = ProblemDims::new(64, 4, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = sample_matrix(&dims, &mut rng);
        let sig = sample_signal(&dims, &Prior::gaussian(1.0).unwrap(), &mut rng);
        let y = a.dot(&sig.x).mapv(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let cfg = FistaConfig::new(0.02, 50).unwrap();
        let m = dims.m() as f64;
        let g = glasso(&a, &y, &cfg, m).unwrap();
        let f = fista(&a, &y, &cfg, m).unwrap();
        assert_eq!(g.x_hat, f.x_hat);
        // Non-binary input is rejected.
        let bad = a.dot(&sig.x);
        assert!(glasso(&a, &bad, &cfg, m).is_err());
    }
}
