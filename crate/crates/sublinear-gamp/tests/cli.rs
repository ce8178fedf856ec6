//! CLI contract tests: exit codes, output files, and the printed threshold
//! comparison.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sublinear-gamp"))
}

#[test]
fn threshold_subcommand_prints_bisection_and_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "threshold",
            "--channel",
            "linear",
            "--prior",
            "const:1",
            "--sigma2",
            "0.25",
            "--lo",
            "1.5",
            "--hi",
            "4.0",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("2.5000"), "missing bisection value: {text}");
    assert!(text.contains("closed form"), "{text}");
    assert!(dir.path().join("threshold.csv").exists());
}

#[test]
fn se_subcommand_emits_traces_for_each_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "se",
            "--channel",
            "linear",
            "--prior",
            "gauss:1",
            "--sigma2",
            "1e-4",
            "--delta",
            "0.5",
            "--delta",
            "1.5",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let trace = std::fs::read_to_string(dir.path().join("se_trace.csv")).unwrap();
    let deltas: std::collections::HashSet<&str> = trace
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("delta"))
        .map(|l| l.split(',').next().unwrap())
        .collect();
    assert_eq!(deltas.len(), 2, "expected two traces: {deltas:?}");
    assert!(dir.path().join("se_summary.csv").exists());
}

#[test]
fn missing_config_file_exits_2() {
    let out = bin()
        .args(["run", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn invalid_config_field_exits_2_with_field_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{
            "version": 1,
            "kind": "gamp_sweep",
            "channel": {"kind": "linear", "sigma2": 1e-4},
            "prior": {"kind": "gaussian", "variance": 1.0},
            "n": 256, "k": 4,
            "deltas": [],
            "algorithms": [{"name": "gamp"}],
            "trials": 5
        }"#,
    )
    .unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("deltas"), "expected field-level message: {err}");
}

#[test]
fn run_subcommand_executes_a_small_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{
                "version": 1,
                "kind": "gamp_sweep",
                "channel": {{"kind": "linear", "sigma2": 1e-4}},
                "prior": {{"kind": "gaussian", "variance": 1.0}},
                "n": 256, "k": 4,
                "deltas": [1.5],
                "algorithms": [{{"name": "gamp"}}, {{"name": "omp"}}],
                "trials": 3,
                "iterations": 5,
                "master_seed": 11,
                "out_dir": {:?}
            }}"#,
            dir.path().join("results")
        ),
    )
    .unwrap();
    let out = bin().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let raw = std::fs::read_to_string(dir.path().join("results/raw.csv")).unwrap();
    assert!(raw.lines().any(|l| l.starts_with('#') && l.contains("config_hash")));
    assert!(raw.contains("delta_eff,algorithm,trial,iter,use,nse,support_ok,seconds"));
    assert!(raw.lines().filter(|l| l.contains(",gamp,")).count() >= 3 * 6);
    assert!(raw.lines().filter(|l| l.contains(",omp,")).count() == 3);
}

#[test]
fn plot_subcommand_writes_figure_script() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("summary.csv");
    std::fs::write(&data, "delta_eff,algorithm\n").unwrap();
    let out = bin()
        .args(["plot", "--figure", "3", "--data"])
        .arg(&data)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let script = std::fs::read_to_string(dir.path().join("fig3.gp")).unwrap();
    assert!(script.contains("summary.csv"));
}

#[test]
fn lemma1_subcommand_writes_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "lemma1",
            "--gamma",
            "0.25",
            "--v",
            "1.0",
            "--log2n",
            "20",
            "--log2n",
            "50",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let text = std::fs::read_to_string(dir.path().join("lemma1.csv")).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('v'))
        .collect();
    assert_eq!(rows.len(), 2);
}

#[test]
fn env_var_thread_fallback_is_accepted() {
    // Just checks the variable is honored without crashing.
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("SUBLINEAR_GAMP_THREADS", "1")
        .args([
            "se",
            "--channel",
            "onebit",
            "--prior",
            "gauss:1",
            "--delta",
            "2.0",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
}

#[test]
fn quiet_flag_suppresses_result_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "threshold",
            "--quiet",
            "--channel",
            "linear",
            "--prior",
            "const:1",
            "--sigma2",
            "0",
            "--lo",
            "1.0",
            "--hi",
            "4.0",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(Path::new(&dir.path().join("threshold.csv")).exists());
}

#[test]
fn bench_subcommand_runs_a_tiny_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "bench", "--channel", "linear", "--n", "256", "--k", "4", "--trials", "2",
            "--iters", "5", "--delta", "1.5", "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    assert!(dir.path().join("raw.csv").exists());
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn numerical_failure_exits_3() {
    // A threshold bracket whose predicate never flips is a numerical
    // failure, not a configuration error.
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "threshold", "--channel", "onebit", "--prior", "gauss:1", "--lo", "1.0",
            "--hi", "8.0", "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}
