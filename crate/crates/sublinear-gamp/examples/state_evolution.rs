//! Iterate the state-evolution recursion for both channels across a few
//! sample-complexity prefactors and print the limits.
//!
//!     cargo run --example state_evolution

use sublinear_gamp::model::{Channel, Prior};
use sublinear_gamp::sevo::{se_run, DEFAULT_SE_TMAX, DEFAULT_SE_TOL};

fn main() {
    let prior = Prior::gaussian(1.0).expect("valid prior");

    println!("linear channel, 40 dB:");
    let channel = Channel::linear(1e-4).expect("valid channel");
    for &delta in &[0.3, 0.5, 1.0, 1.5, 2.0] {
        let trace = se_run(&channel, &prior, delta, DEFAULT_SE_TMAX, DEFAULT_SE_TOL)
            .expect("recursion runs");
        let fp = trace.fixed_points.unwrap();
        println!(
            "  delta = {delta:4.2}: v_in_limit = {:10.4e} after {} iterations, {} fixed point(s)",
            trace.v_in_limit(),
            trace.v_in.len() - 1,
            fp.count
        );
    }

    println!("1-bit sign channel, noiseless:");
    let channel = Channel::one_bit_sign(0.0).expect("valid channel");
    for &delta in &[1.0, 2.0, 4.0, 6.0] {
        let trace = se_run(&channel, &prior, delta, DEFAULT_SE_TMAX, DEFAULT_SE_TOL)
            .expect("recursion runs");
        let fp = trace.fixed_points.unwrap();
        println!(
            "  delta = {delta:4.2}: v_in_limit = {:10.4e} after {} iterations, {} fixed point(s)",
            trace.v_in_limit(),
            trace.v_in.len() - 1,
            fp.count
        );
    }
}
