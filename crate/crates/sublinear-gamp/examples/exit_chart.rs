//! Sample the EXIT-like chart (inner transfer curve φ against the outer
//! curve ψ) and count its fixed points for both channels.
//!
//!     cargo run --example exit_chart

use sublinear_gamp::model::{Channel, Prior};
use sublinear_gamp::sevo::chart::default_grid;
use sublinear_gamp::sevo::{count_fixed_points, exit_chart};

fn show(channel: &Channel, prior: &Prior, delta: f64) {
    let grid = default_grid(channel, prior, delta).expect("grid");
    let curves = exit_chart(channel, prior, delta, &grid).expect("chart");
    let fp = count_fixed_points(&curves).expect("count");
    println!(
        "  delta = {delta:4.2}: {} fixed point(s){}{}",
        fp.count,
        if fp.tangency { " [tangency]" } else { "" },
        if curves.origin_fixed_point {
            " [origin included]"
        } else {
            ""
        }
    );
    // A few sample rows of the curves.
    for idx in [0, grid.len() / 2, grid.len() - 1] {
        let psi = curves.psi[idx].map_or("undefined".into(), |v| format!("{v:.4e}"));
        println!(
            "    x = {:.4e}  phi = {:.4e}  psi = {psi}",
            curves.x[idx], curves.phi[idx]
        );
    }
}

fn main() {
    let prior = Prior::gaussian(1.0).expect("valid prior");

    println!("linear channel, 40 dB:");
    let linear = Channel::linear(1e-4).expect("valid channel");
    for &delta in &[0.3, 1.5] {
        show(&linear, &prior, delta);
    }

    println!("1-bit sign channel, noiseless:");
    let onebit = Channel::one_bit_sign(0.0).expect("valid channel");
    for &delta in &[1.0, 2.0, 4.0] {
        show(&onebit, &prior, delta);
    }
}
