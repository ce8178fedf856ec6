//! Run Bayesian GAMP on one noisy linear instance at desk scale and print
//! the per-iteration error trace.
//!
//!     cargo run --example gamp_linear

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sublinear_gamp::{
    apply_channel, gamp_run, sample_matrix, sample_signal, Channel, GampConfig, Prior,
    ProblemDims,
};

fn main() {
    let dims = ProblemDims::new(1 << 12, 16, 2.0).expect("valid dimensions");
    let prior = Prior::gaussian(1.0).expect("valid prior");
    let channel = Channel::linear(1e-4).expect("valid channel");

    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let signal = sample_signal(&dims, &prior, &mut rng);
    let a = sample_matrix(&dims, &mut rng);
    let y = apply_channel(&channel, &a.dot(&signal.x), &mut rng);

    println!(
        "N = {}, k = {}, M = {} (delta_eff = {:.4})",
        dims.n(),
        dims.k(),
        dims.m(),
        dims.delta_eff()
    );

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

    println!("{:>4}  {:>12}  {:>12}  {:>12}", "t", "v_in", "v_out", "|x-xhat|^2");
    for row in &trace.rows {
        println!(
            "{:>4}  {:>12.5e}  {:>12}  {:>12.5e}",
            row.t,
            row.v_in,
            row.v_out.map_or("-".into(), |v| format!("{v:.5e}")),
            row.unnormalized_se.unwrap_or(f64::NAN),
        );
    }
}
