//! Small Monte Carlo benchmark through the harness: GAMP versus OMP on the
//! linear channel over a delta grid, with raw and summary CSV output.
//!
//!     cargo run --example benchmark_sweep

use sublinear_gamp::harness::{run_experiment, AlgorithmSpec, ExperimentConfig, ExperimentKind};
use sublinear_gamp::model::{Channel, Prior};

fn main() {
    let cfg = ExperimentConfig {
        version: 1,
        kind: ExperimentKind::GampSweep,
        channel: Channel::linear(1e-4).expect("valid channel"),
        prior: Prior::gaussian(1.0).expect("valid prior"),
        n: Some(1 << 10),
        k: Some(8),
        gamma: None,
        deltas: vec![0.8, 1.2, 1.6, 2.0],
        algorithms: vec![AlgorithmSpec::Gamp { damping: 1.0 }, AlgorithmSpec::Omp {}],
        trials: 25,
        iterations: 15,
        master_seed: 2024,
        out_dir: "out/benchmark_sweep".into(),
        log2n_list: vec![],
        v_list: vec![],
        delta_bracket: None,
        tol_delta: 1e-3,
        weak_threshold: false,
        emit_plot: true,
        record_timing: false,
    };
    let artifacts = run_experiment(&cfg).expect("experiment runs");
    for m in &artifacts.messages {
        println!("{m}");
    }
    println!("raw:     {}", artifacts.raw_csv.unwrap().display());
    println!("summary: {}", artifacts.summary_csv.unwrap().display());
    if let Some(p) = artifacts.plot_script {
        println!("plot:    {}", p.display());
    }
}
