//! Locate reconstruction thresholds by bisection on the state evolution and
//! compare with the closed form 2(1 + σ²/u_min²) for constant-amplitude
//! signals on the linear channel.
//!
//!     cargo run --example thresholds

use sublinear_gamp::model::{Channel, Prior};
use sublinear_gamp::sevo::{
    prop1_threshold, reconstruction_threshold, weak_reconstruction_threshold,
};

fn main() {
    println!("constant-amplitude priors, linear channel:");
    for &(u, sigma2) in &[(1.0, 0.0), (1.0, 0.25), (2.0, 1.0)] {
        let prior = Prior::constant_amplitude(u).expect("valid prior");
        let channel = Channel::linear(sigma2).expect("valid channel");
        let closed = prop1_threshold(u, sigma2).expect("closed form");
        let est = reconstruction_threshold(&channel, &prior, 0.5 * closed, 2.0 * closed, 1e-5)
            .expect("bisection");
        println!(
            "  u = {u}, sigma^2 = {sigma2}: bisection {:.5} vs closed form {closed:.5}",
            est.value
        );
    }

    println!("weak threshold (unique fixed point), Gaussian prior, 40 dB:");
    let prior = Prior::gaussian(1.0).expect("valid prior");
    let channel = Channel::linear(1e-4).expect("valid channel");
    let est = weak_reconstruction_threshold(&channel, &prior, 0.15, 2.0, 1e-4)
        .expect("bisection");
    println!("  delta_w* = {:.5}  (bracket [{:.5}, {:.5}])", est.value, est.lo, est.hi);
}
