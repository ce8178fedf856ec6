//! Recover a sparse signal from noiseless 1-bit sign measurements with
//! Bayesian GAMP, BIHT, and the generalized Lasso, and compare the
//! normalized errors (only the direction is identifiable from signs).
//!
//!     cargo run --example gamp_onebit

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sublinear_gamp::baselines::{biht, glasso, BihtConfig, FistaConfig};
use sublinear_gamp::harness::metric_normalized;
use sublinear_gamp::{
    apply_channel, gamp_run, sample_matrix, sample_signal, Channel, GampConfig, Prior,
    ProblemDims,
};

fn main() {
    let dims = ProblemDims::new(1 << 12, 16, 4.0).expect("valid dimensions");
    let prior = Prior::gaussian(1.0).expect("valid prior");
    let channel = Channel::one_bit_sign(0.0).expect("valid channel");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let signal = sample_signal(&dims, &prior, &mut rng);
    let a = sample_matrix(&dims, &mut rng);
    let y = apply_channel(&channel, &a.dot(&signal.x), &mut rng);
    println!("N = {}, k = {}, M = {} sign bits", dims.n(), dims.k(), dims.m());

    let trace = gamp_run(
        &a,
        &y,
        &channel,
        &prior,
        &dims,
        &GampConfig::new(20),
        Some(&signal),
    )
    .expect("run completes");
    let gamp_nse = trace.final_row().and_then(|r| r.normalized_se).unwrap();

    let biht_x = biht(&a, &y, &BihtConfig::new(dims.k(), 20).expect("valid")).expect("biht runs");
    let biht_nse = metric_normalized(&biht_x, &signal.x).unwrap();

    // Small lambda sweep for the generalized Lasso.
    let mut glasso_nse = f64::INFINITY;
    for i in 0..8 {
        let lam = 1e-3 * 10f64.powf(2.0 * i as f64 / 7.0);
        let cfg = FistaConfig::new(lam, 20).expect("valid");
        let r = glasso(&a, &y, &cfg, dims.m() as f64).expect("glasso runs");
        glasso_nse = glasso_nse.min(metric_normalized(&r.x_hat, &signal.x).unwrap());
    }

    println!("normalized-error squared norm:");
    println!("  gamp   {gamp_nse:.4e}");
    println!("  biht   {biht_nse:.4e}");
    println!("  glasso {glasso_nse:.4e}  (best over 8-point lambda sweep)");
}
