//! Semi-analytic expected unnormalized square error of the spike-and-slab
//! denoiser as N grows with k = N^0.25, against its asymptote. Dimensions
//! are carried in the log domain, so N = 2^1000 costs the same as N = 2^20.
//!
//!     cargo run --example finite_size_curve

use sublinear_gamp::model::Prior;
use sublinear_gamp::sevo::lemma1_curve;

fn main() {
    let prior = Prior::gaussian(1.0).expect("valid prior");
    let grid = [20u32, 50, 100, 200, 500, 1000];
    for &v in &[0.5, 1.0, 2.0] {
        let points = lemma1_curve(&prior, v, 0.25, &grid, 1e-9).expect("quadrature converges");
        println!("v = {v}: asymptote = {:.6}", points[0].asymptote);
        for p in points {
            println!(
                "  log2 N = {:4}: E|X - f_X(Y)|^2 = {:.6}  (excess {:+.2e})",
                p.log2_n,
                p.expected_use,
                p.expected_use - p.asymptote
            );
        }
    }
}
