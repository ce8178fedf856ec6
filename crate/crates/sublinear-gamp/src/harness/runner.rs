//! Experiment execution: seeded trial-parallel Monte Carlo sweeps, state
//! evolution exports, and CSV emission.
//!
//! Determinism contract: every trial derives its own RNG stream from
//! (master_seed, δ index, trial index), results are merged in (δ, trial)
//! order, and floats are written with shortest-roundtrip formatting, so a
//! rerun with the same config and seed produces byte-identical raw CSV no
//! matter how many worker threads ran.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use ndarray::{Array1, Array2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use super::config::{AlgorithmSpec, ConfigError, ExperimentConfig, ExperimentKind};
use super::gnuplot;
use super::metrics::{metric_normalized, metric_unnormalized, support_recovered};
use crate::baselines::{
    biht, fista_traced, glasso, lambda_default, omp, BaselineError, BihtConfig, FistaConfig,
};
use crate::gamp::{gamp_run, GampConfig, GampError};
use crate::model::{
    apply_channel, sample_matrix, sample_signal, ModelError, Prior, ProblemDims,
    SignalInstance,
};
use crate::sevo::{self, SevoError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write output {path}: {source}")]
    Output {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Gamp(#[from] GampError),
    #[error(transparent)]
    Sevo(#[from] SevoError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

impl HarnessError {
    /// Process exit code: 2 for configuration/output problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Output { .. } => 2,
            _ => 3,
        }
    }
}

/// One raw CSV record (schema:
/// `delta_eff,algorithm,trial,iter,use,nse,support_ok,seconds`).
#[derive(Debug, Clone)]
pub struct TrialRow {
    pub delta_eff: f64,
    pub algorithm: &'static str,
    pub trial: usize,
    pub iter: usize,
    pub use_err: Option<f64>,
    pub nse: Option<f64>,
    pub support_ok: Option<bool>,
    pub seconds: Option<f64>,
}

/// Paths produced by [`run_experiment`].
#[derive(Debug, Clone, Default)]
pub struct RunArtifacts {
    pub raw_csv: Option<PathBuf>,
    pub summary_csv: Option<PathBuf>,
    pub plot_script: Option<PathBuf>,
    /// Human-readable result lines (thresholds, selected λ, ...).
    pub messages: Vec<String>,
}

/// RNG stream for one trial, independent of execution order.
pub fn trial_rng(master_seed: u64, delta_idx: u32, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(((delta_idx as u64) << 32) | trial as u64);
    rng
}

fn fmt_opt_f64(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_nan() => "nan".to_string(),
        Some(x) => format!("{x}"),
        None => String::new(),
    }
}

fn fmt_opt_bool(v: Option<bool>) -> String {
    match v {
        Some(true) => "1".to_string(),
        Some(false) => "0".to_string(),
        None => String::new(),
    }
}

struct OutFile {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl OutFile {
    fn create(dir: &PathBuf, name: &str) -> Result<Self, HarnessError> {
        fs::create_dir_all(dir).map_err(|source| HarnessError::Output {
            path: dir.clone(),
            source,
        })?;
        let path = dir.join(name);
        let file = File::create(&path).map_err(|source| HarnessError::Output {
            path: path.clone(),
            source,
        })?;
        Ok(Self {
            path,
            writer: BufWriter::new(file),
        })
    }

    fn line(&mut self, text: &str) -> Result<(), HarnessError> {
        writeln!(self.writer, "{text}").map_err(|source| HarnessError::Output {
            path: self.path.clone(),
            source,
        })
    }

    fn finish(mut self) -> Result<PathBuf, HarnessError> {
        self.writer.flush().map_err(|source| HarnessError::Output {
            path: self.path.clone(),
            source,
        })?;
        Ok(self.path)
    }
}

fn header_comment(out: &mut OutFile, cfg: &ExperimentConfig, extra: &[String]) -> Result<(), HarnessError> {
    out.line(&format!(
        "# config_hash=0x{:016x} master_seed={} kind={:?}",
        cfg.hash(),
        cfg.master_seed,
        cfg.kind
    ))?;
    if !cfg.deltas.is_empty() {
        out.line(&format!("# delta_requested={:?}", cfg.deltas))?;
        if let (Some(n), Some(k)) = (cfg.n, cfg.k) {
            let effs: Vec<String> = cfg
                .deltas
                .iter()
                .filter_map(|&d| ProblemDims::new(n, k, d).ok())
                .map(|dims| format!("{}", dims.delta_eff()))
                .collect();
            out.line(&format!("# delta_eff=[{}]", effs.join(", ")))?;
        }
    }
    for e in extra {
        out.line(&format!("# {e}"))?;
    }
    Ok(())
}

/// Run the experiment described by `cfg`, writing CSV artifacts under
/// `cfg.out_dir`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts, HarnessError> {
    cfg.validate()?;
    match cfg.kind {
        ExperimentKind::GampSweep => monte_carlo_sweep(cfg),
        ExperimentKind::Convergence => convergence_experiment(cfg),
        ExperimentKind::SeSweep => se_sweep(cfg),
        ExperimentKind::SeChart => se_chart(cfg),
        ExperimentKind::Lemma1 => lemma1_experiment(cfg),
        ExperimentKind::Threshold => threshold_experiment(cfg),
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo sweep
// ---------------------------------------------------------------------------

/// 12-point logarithmic λ grid spanning ±1.5 decades around `center`.
pub fn lambda_grid(center: f64) -> Vec<f64> {
    (0..12)
        .map(|i| center * 10f64.powf(-1.5 + 3.0 * i as f64 / 11.0))
        .collect()
}

enum RowGroup {
    Fixed(Vec<TrialRow>),
    /// One candidate row per λ; the runner keeps the per-δ winner.
    Swept {
        name: &'static str,
        rows_per_lambda: Vec<TrialRow>,
        metric_per_lambda: Vec<f64>,
    },
}

struct TrialInstance {
    dims: ProblemDims,
    a: Array2<f64>,
    y: Array1<f64>,
    signal: SignalInstance,
}

fn sample_instance(cfg: &ExperimentConfig, delta: f64, rng: &mut ChaCha8Rng) -> Result<TrialInstance, HarnessError> {
    let dims = ProblemDims::new(
        cfg.n.expect("validated"),
        cfg.k.expect("validated"),
        delta,
    )?;
    let signal = sample_signal(&dims, &cfg.prior, rng);
    let a = sample_matrix(&dims, rng);
    let y = apply_channel(&cfg.channel, &crate::linalg::mat_vec(&a, &signal.x), rng);
    Ok(TrialInstance { dims, a, y, signal })
}

fn final_metrics_row(
    algorithm: &'static str,
    inst: &TrialInstance,
    x_hat: &Array1<f64>,
    trial: usize,
    iter: usize,
    seconds: Option<f64>,
) -> TrialRow {
    TrialRow {
        delta_eff: inst.dims.delta_eff(),
        algorithm,
        trial,
        iter,
        use_err: metric_unnormalized(x_hat, &inst.signal.x).ok(),
        nse: metric_normalized(x_hat, &inst.signal.x).ok(),
        support_ok: Some(support_recovered(x_hat, &inst.signal.support)),
        seconds,
    }
}

fn gamp_rows(
    cfg: &ExperimentConfig,
    inst: &TrialInstance,
    trial: usize,
    damping: f64,
    iterations: usize,
    record_timing: bool,
) -> Vec<TrialRow> {
    let start = Instant::now();
    let mut gc = GampConfig::new(iterations);
    gc.damping = damping;
    let result = gamp_run(
        &inst.a,
        &inst.y,
        &cfg.channel,
        &cfg.prior,
        &inst.dims,
        &gc,
        Some(&inst.signal),
    );
    let elapsed = start.elapsed().as_secs_f64();
    let (trace, failed) = match result {
        Ok(t) => (t, false),
        Err(GampError::DegenerateOuterSlope { trace, .. })
        | Err(GampError::NonFinite { trace, .. }) => (*trace, true),
        Err(_) => (crate::gamp::GampTrace::default(), true),
    };
    let mut rows: Vec<TrialRow> = trace
        .rows
        .iter()
        .map(|r| TrialRow {
            delta_eff: inst.dims.delta_eff(),
            algorithm: "gamp",
            trial,
            iter: r.t,
            use_err: r.unnormalized_se,
            nse: r.normalized_se,
            support_ok: None,
            seconds: None,
        })
        .collect();
    if failed {
        // NaN sentinel row marks a diverged run.
        rows.push(TrialRow {
            delta_eff: inst.dims.delta_eff(),
            algorithm: "gamp",
            trial,
            iter: rows.len(),
            use_err: Some(f64::NAN),
            nse: Some(f64::NAN),
            support_ok: Some(false),
            seconds: None,
        });
    } else if let (Some(last), Some(x_hat)) = (rows.last_mut(), trace.final_x_hat.as_ref()) {
        last.support_ok = Some(support_recovered(x_hat, &inst.signal.support));
    }
    if record_timing {
        if let Some(last) = rows.last_mut() {
            last.seconds = Some(elapsed);
        }
    }
    rows
}

fn run_algorithms(
    cfg: &ExperimentConfig,
    inst: &TrialInstance,
    trial: usize,
) -> Result<Vec<RowGroup>, HarnessError> {
    let mut groups = Vec::with_capacity(cfg.algorithms.len());
    let one_bit = cfg.channel.is_one_bit();
    for alg in &cfg.algorithms {
        match alg {
            AlgorithmSpec::Gamp { damping } => {
                groups.push(RowGroup::Fixed(gamp_rows(
                    cfg,
                    inst,
                    trial,
                    *damping,
                    cfg.iterations,
                    cfg.record_timing,
                )));
            }
            AlgorithmSpec::Omp {} => {
                let start = Instant::now();
                let r = omp(&inst.a, &inst.y, inst.dims.k())?;
                let secs = cfg.record_timing.then(|| start.elapsed().as_secs_f64());
                groups.push(RowGroup::Fixed(vec![final_metrics_row(
                    "omp",
                    inst,
                    &r.x_hat,
                    trial,
                    inst.dims.k(),
                    secs,
                )]));
            }
            AlgorithmSpec::Biht { step } => {
                let start = Instant::now();
                let mut bc = BihtConfig::new(inst.dims.k(), cfg.iterations)?;
                bc.step = *step;
                let x = biht(&inst.a, &inst.y, &bc)?;
                let secs = cfg.record_timing.then(|| start.elapsed().as_secs_f64());
                groups.push(RowGroup::Fixed(vec![final_metrics_row(
                    "biht",
                    inst,
                    &x,
                    trial,
                    cfg.iterations,
                    secs,
                )]));
            }
            AlgorithmSpec::Fista { lambda, iterations }
            | AlgorithmSpec::Glasso { lambda, iterations } => {
                let name: &'static str = if matches!(alg, AlgorithmSpec::Fista { .. }) {
                    "fista"
                } else {
                    "glasso"
                };
                let iters = iterations.unwrap_or(if one_bit { cfg.iterations } else { 1000 });
                let lambdas = match lambda {
                    Some(l) => vec![*l],
                    None => lambda_grid(default_lambda_center(cfg, &inst.dims)?),
                };
                let mut rows_per_lambda = Vec::with_capacity(lambdas.len());
                let mut metric_per_lambda = Vec::with_capacity(lambdas.len());
                for &lam in &lambdas {
                    let start = Instant::now();
                    let fc = FistaConfig::new(lam, iters)?;
                    let m_scale = inst.dims.m() as f64;
                    let result = if one_bit {
                        glasso(&inst.a, &inst.y, &fc, m_scale)?
                    } else {
                        fista_traced(&inst.a, &inst.y, &fc, m_scale, |_, _| {})?
                    };
                    let secs = cfg.record_timing.then(|| start.elapsed().as_secs_f64());
                    let row =
                        final_metrics_row(name, inst, &result.x_hat, trial, iters, secs);
                    // Selection metric: final USE on the linear channel,
                    // final normalized error on the 1-bit channel.
                    let metric = if one_bit {
                        row.nse.unwrap_or(f64::INFINITY)
                    } else {
                        row.use_err.unwrap_or(f64::INFINITY)
                    };
                    metric_per_lambda.push(metric);
                    rows_per_lambda.push(row);
                }
                if rows_per_lambda.len() == 1 {
                    groups.push(RowGroup::Fixed(rows_per_lambda));
                } else {
                    groups.push(RowGroup::Swept {
                        name,
                        rows_per_lambda,
                        metric_per_lambda,
                    });
                }
            }
        }
    }
    Ok(groups)
}

fn default_lambda_center(cfg: &ExperimentConfig, dims: &ProblemDims) -> Result<f64, HarnessError> {
    let sigma2 = cfg.channel.sigma2();
    if cfg.channel.is_one_bit() || sigma2 == 0.0 {
        // ±1 pseudo-observations have unit power; reuse the formula with
        // that in place of the noise variance.
        Ok((0.8 * (dims.n() as f64).ln() / dims.m() as f64).sqrt())
    } else {
        Ok(lambda_default(sigma2, dims.m(), dims.n())?)
    }
}

fn median(values: &mut [f64]) -> f64 {
    percentile_sorted_mut(values, 0.5)
}

fn percentile_sorted_mut(values: &mut [f64], p: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let idx = p.clamp(0.0, 1.0) * (values.len() - 1) as f64;
    let lo = idx.floor() as usize;
    let hi = idx.ceil() as usize;
    let w = idx - lo as f64;
    values[lo] * (1.0 - w) + values[hi] * w
}

fn monte_carlo_sweep(cfg: &ExperimentConfig) -> Result<RunArtifacts, HarnessError> {
    let jobs: Vec<(usize, usize)> = (0..cfg.deltas.len())
        .flat_map(|di| (0..cfg.trials).map(move |t| (di, t)))
        .collect();
    let outputs: Vec<Result<Vec<RowGroup>, HarnessError>> = jobs
        .par_iter()
        .map(|&(di, trial)| {
            let mut rng = trial_rng(cfg.master_seed, di as u32, trial as u32);
            let inst = sample_instance(cfg, cfg.deltas[di], &mut rng)?;
            run_algorithms(cfg, &inst, trial)
        })
        .collect();

    // Per-(δ, swept algorithm) λ selection by the median of the final
    // metric across trials.
    let mut lambda_choice: std::collections::BTreeMap<(usize, &'static str), usize> =
        std::collections::BTreeMap::new();
    let mut messages = Vec::new();
    for di in 0..cfg.deltas.len() {
        let mut per_alg: std::collections::BTreeMap<&'static str, Vec<Vec<f64>>> =
            std::collections::BTreeMap::new();
        for (ji, &(jdi, _)) in jobs.iter().enumerate() {
            if jdi != di {
                continue;
            }
            if let Ok(groups) = &outputs[ji] {
                for g in groups {
                    if let RowGroup::Swept {
                        name,
                        metric_per_lambda,
                        ..
                    } = g
                    {
                        per_alg
                            .entry(name)
                            .or_default()
                            .push(metric_per_lambda.clone());
                    }
                }
            }
        }
        for (name, metric_rows) in per_alg {
            let n_lambda = metric_rows[0].len();
            let best = (0..n_lambda)
                .map(|li| {
                    let mut vals: Vec<f64> =
                        metric_rows.iter().map(|r| r[li]).collect();
                    (li, median(&mut vals))
                })
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
                .map(|(li, _)| li)
                .unwrap_or(0);
            messages.push(format!(
                "delta={} algorithm={name}: selected lambda index {best} of {n_lambda}",
                cfg.deltas[di]
            ));
            lambda_choice.insert((di, name), best);
        }
    }

    let mut raw = OutFile::create(&cfg.out_dir, "raw.csv")?;
    header_comment(&mut raw, cfg, &[])?;
    raw.line("delta_eff,algorithm,trial,iter,use,nse,support_ok,seconds")?;
    let mut all_rows: Vec<TrialRow> = Vec::new();
    for (ji, output) in outputs.into_iter().enumerate() {
        let (di, _) = jobs[ji];
        for group in output? {
            match group {
                RowGroup::Fixed(rows) => all_rows.extend(rows),
                RowGroup::Swept {
                    name,
                    rows_per_lambda,
                    ..
                } => {
                    let li = lambda_choice.get(&(di, name)).copied().unwrap_or(0);
                    all_rows.push(rows_per_lambda[li].clone());
                }
            }
        }
    }
    for row in &all_rows {
        raw.line(&format!(
            "{},{},{},{},{},{},{},{}",
            row.delta_eff,
            row.algorithm,
            row.trial,
            row.iter,
            fmt_opt_f64(row.use_err),
            fmt_opt_f64(row.nse),
            fmt_opt_bool(row.support_ok),
            fmt_opt_f64(row.seconds),
        ))?;
    }
    let raw_path = raw.finish()?;

    let summary_path = write_summary(cfg, &all_rows)?;
    let plot_script = if cfg.emit_plot {
        let figure = if cfg.channel.is_one_bit() { 6 } else { 3 };
        Some(gnuplot::emit_figure_script(
            figure,
            &summary_path,
            &cfg.out_dir,
        )
        .map_err(|source| HarnessError::Output {
            path: cfg.out_dir.clone(),
            source,
        })?)
    } else {
        None
    };
    Ok(RunArtifacts {
        raw_csv: Some(raw_path),
        summary_csv: Some(summary_path),
        plot_script,
        messages,
    })
}

/// Summary statistics per (δ_eff, algorithm, iteration).
pub fn summarize(rows: &[TrialRow]) -> Vec<(f64, &'static str, usize, SummaryStats)> {
    let mut groups: std::collections::BTreeMap<(u64, &'static str, usize), (f64, Vec<&TrialRow>)> =
        std::collections::BTreeMap::new();
    for row in rows {
        groups
            .entry((row.delta_eff.to_bits(), row.algorithm, row.iter))
            .or_insert_with(|| (row.delta_eff, Vec::new()))
            .1
            .push(row);
    }
    groups
        .into_iter()
        .map(|((_, alg, iter), (delta, members))| {
            (delta, alg, iter, SummaryStats::from_rows(&members))
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct SummaryStats {
    pub count: usize,
    pub use_stats: [f64; 4],
    pub nse_stats: [f64; 4],
}

impl SummaryStats {
    fn from_rows(rows: &[&TrialRow]) -> Self {
        let stats = |vals: Vec<f64>| -> [f64; 4] {
            if vals.is_empty() {
                return [f64::NAN; 4];
            }
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let mut v = vals;
            let p10 = percentile_sorted_mut(&mut v, 0.10);
            let med = percentile_sorted_mut(&mut v, 0.50);
            let p90 = percentile_sorted_mut(&mut v, 0.90);
            [mean, med, p10, p90]
        };
        let use_vals: Vec<f64> = rows.iter().filter_map(|r| r.use_err).collect();
        let nse_vals: Vec<f64> = rows.iter().filter_map(|r| r.nse).collect();
        Self {
            count: rows.len(),
            use_stats: stats(use_vals),
            nse_stats: stats(nse_vals),
        }
    }
}

fn write_summary(cfg: &ExperimentConfig, rows: &[TrialRow]) -> Result<PathBuf, HarnessError> {
    let mut out = OutFile::create(&cfg.out_dir, "summary.csv")?;
    header_comment(&mut out, cfg, &[])?;
    out.line(
        "delta_eff,algorithm,iter,count,use_mean,use_median,use_p10,use_p90,nse_mean,nse_median,nse_p10,nse_p90",
    )?;
    for (delta, alg, iter, s) in summarize(rows) {
        out.line(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            delta,
            alg,
            iter,
            s.count,
            s.use_stats[0],
            s.use_stats[1],
            s.use_stats[2],
            s.use_stats[3],
            s.nse_stats[0],
            s.nse_stats[1],
            s.nse_stats[2],
            s.nse_stats[3],
        ))?;
    }
    out.finish()
}

// ---------------------------------------------------------------------------
// Convergence experiment (error versus iteration at a fixed δ)
// ---------------------------------------------------------------------------

fn convergence_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts, HarnessError> {
    let delta = cfg.deltas[0];
    let outputs: Vec<Result<Vec<TrialRow>, HarnessError>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.master_seed, 0, trial as u32);
            let inst = sample_instance(cfg, delta, &mut rng)?;
            let mut rows = Vec::new();
            for alg in &cfg.algorithms {
                match alg {
                    AlgorithmSpec::Gamp { damping } => {
                        rows.extend(gamp_rows(cfg, &inst, trial, *damping, cfg.iterations, false));
                    }
                    AlgorithmSpec::Fista { lambda, iterations } => {
                        let iters = iterations.unwrap_or(1000);
                        let lam = match lambda {
                            Some(l) => *l,
                            None => default_lambda_center(cfg, &inst.dims)?,
                        };
                        let fc = FistaConfig::new(lam, iters)?;
                        let mut per_iter: Vec<TrialRow> = Vec::with_capacity(iters);
                        fista_traced(&inst.a, &inst.y, &fc, inst.dims.m() as f64, |it, x| {
                            per_iter.push(final_metrics_row("fista", &inst, x, trial, it, None));
                        })?;
                        rows.extend(per_iter);
                    }
                    AlgorithmSpec::Omp {} => {
                        // Per-round error by rerunning with growing budgets;
                        // rounds are cheap at desk scale.
                        for budget in 1..=inst.dims.k() {
                            let r = omp(&inst.a, &inst.y, budget)?;
                            rows.push(final_metrics_row("omp", &inst, &r.x_hat, trial, budget, None));
                        }
                    }
                    AlgorithmSpec::Biht { step } => {
                        let mut bc = BihtConfig::new(inst.dims.k(), cfg.iterations)?;
                        bc.step = *step;
                        let x = biht(&inst.a, &inst.y, &bc)?;
                        rows.push(final_metrics_row("biht", &inst, &x, trial, cfg.iterations, None));
                    }
                    AlgorithmSpec::Glasso { lambda, iterations } => {
                        let iters = iterations.unwrap_or(cfg.iterations);
                        let lam = match lambda {
                            Some(l) => *l,
                            None => default_lambda_center(cfg, &inst.dims)?,
                        };
                        let fc = FistaConfig::new(lam, iters)?;
                        let r = glasso(&inst.a, &inst.y, &fc, inst.dims.m() as f64)?;
                        rows.push(final_metrics_row("glasso", &inst, &r.x_hat, trial, iters, None));
                    }
                }
            }
            Ok(rows)
        })
        .collect();

    let mut all_rows = Vec::new();
    for o in outputs {
        all_rows.extend(o?);
    }
    let mut raw = OutFile::create(&cfg.out_dir, "raw.csv")?;
    header_comment(&mut raw, cfg, &[])?;
    raw.line("delta_eff,algorithm,trial,iter,use,nse,support_ok,seconds")?;
    for row in &all_rows {
        raw.line(&format!(
            "{},{},{},{},{},{},{},{}",
            row.delta_eff,
            row.algorithm,
            row.trial,
            row.iter,
            fmt_opt_f64(row.use_err),
            fmt_opt_f64(row.nse),
            fmt_opt_bool(row.support_ok),
            fmt_opt_f64(row.seconds),
        ))?;
    }
    let raw_path = raw.finish()?;
    let summary_path = write_summary(cfg, &all_rows)?;
    let plot_script = if cfg.emit_plot {
        Some(
            gnuplot::emit_figure_script(4, &summary_path, &cfg.out_dir).map_err(|source| {
                HarnessError::Output {
                    path: cfg.out_dir.clone(),
                    source,
                }
            })?,
        )
    } else {
        None
    };
    Ok(RunArtifacts {
        raw_csv: Some(raw_path),
        summary_csv: Some(summary_path),
        plot_script,
        messages: Vec::new(),
    })
}

// ---------------------------------------------------------------------------
// State evolution experiments
// ---------------------------------------------------------------------------

fn se_sweep(cfg: &ExperimentConfig) -> Result<RunArtifacts, HarnessError> {
    let mut trace_file = OutFile::create(&cfg.out_dir, "se_trace.csv")?;
    header_comment(&mut trace_file, cfg, &[])?;
    trace_file.line("delta,iter,v_in,v_out")?;
    let mut summary = OutFile::create(&cfg.out_dir, "se_summary.csv")?;
    header_comment(&mut summary, cfg, &[])?;
    summary.line("delta,v_in_limit,converged,fixed_point_count,tangency")?;
    let mut messages = Vec::new();
    for &delta in &cfg.deltas {
        let trace = sevo::se_run(
            &cfg.channel,
            &cfg.prior,
            delta,
            sevo::DEFAULT_SE_TMAX,
            sevo::DEFAULT_SE_TOL,
        )?;
        for (t, &vi) in trace.v_in.iter().enumerate() {
            let vo = trace.v_out.get(t).map(|v| format!("{v}")).unwrap_or_default();
            trace_file.line(&format!("{delta},{t},{vi},{vo}"))?;
        }
        let fp = trace.fixed_points.expect("se_run attaches chart analysis");
        summary.line(&format!(
            "{},{},{},{},{}",
            delta,
            trace.v_in_limit(),
            trace.converged as u8,
            fp.count,
            fp.tangency as u8
        ))?;
        messages.push(format!(
            "delta={delta}: v_in_limit={:.6e} fixed_points={}",
            trace.v_in_limit(),
            fp.count
        ));
    }
    let raw = trace_file.finish()?;
    let sum = summary.finish()?;
    Ok(RunArtifacts {
        raw_csv: Some(raw),
        summary_csv: Some(sum),
        plot_script: None,
        messages,
    })
}

fn se_chart(cfg: &ExperimentConfig) -> Result<RunArtifacts, HarnessError> {
    let mut out = OutFile::create(&cfg.out_dir, "chart.csv")?;
    header_comment(&mut out, cfg, &[])?;
    out.line("delta,x,phi,psi")?;
    for &delta in &cfg.deltas {
        let grid = sevo::chart::default_grid(&cfg.channel, &cfg.prior, delta)?;
        let curves = sevo::exit_chart(&cfg.channel, &cfg.prior, delta, &grid)?;
        for i in 0..curves.x.len() {
            let psi = curves.psi[i].map(|p| format!("{p}")).unwrap_or_default();
            out.line(&format!("{},{},{},{}", delta, curves.x[i], curves.phi[i], psi))?;
        }
    }
    let path = out.finish()?;
    let plot_script = if cfg.emit_plot {
        let figure = if cfg.channel.is_one_bit() { 5 } else { 2 };
        Some(
            gnuplot::emit_figure_script(figure, &path, &cfg.out_dir).map_err(|source| {
                HarnessError::Output {
                    path: cfg.out_dir.clone(),
                    source,
                }
            })?,
        )
    } else {
        None
    };
    Ok(RunArtifacts {
        raw_csv: Some(path),
        summary_csv: None,
        plot_script,
        messages: Vec::new(),
    })
}

fn lemma1_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts, HarnessError> {
    let mut out = OutFile::create(&cfg.out_dir, "lemma1.csv")?;
    header_comment(&mut out, cfg, &[])?;
    out.line("v,log2_n,expected_use,asymptote")?;
    let gamma = cfg.gamma.expect("validated");
    for &v in &cfg.v_list {
        let points = sevo::lemma1_curve(&cfg.prior, v, gamma, &cfg.log2n_list, 1e-9)?;
        for p in points {
            out.line(&format!(
                "{},{},{},{}",
                v, p.log2_n, p.expected_use, p.asymptote
            ))?;
        }
    }
    let path = out.finish()?;
    let plot_script = if cfg.emit_plot {
        Some(
            gnuplot::emit_figure_script(1, &path, &cfg.out_dir).map_err(|source| {
                HarnessError::Output {
                    path: cfg.out_dir.clone(),
                    source,
                }
            })?,
        )
    } else {
        None
    };
    Ok(RunArtifacts {
        raw_csv: Some(path),
        summary_csv: None,
        plot_script,
        messages: Vec::new(),
    })
}

fn threshold_experiment(cfg: &ExperimentConfig) -> Result<RunArtifacts, HarnessError> {
    let (lo, hi) = cfg.delta_bracket.expect("validated");
    let mut out = OutFile::create(&cfg.out_dir, "threshold.csv")?;
    header_comment(&mut out, cfg, &[])?;
    out.line("quantity,value,bracket_lo,bracket_hi")?;
    let mut messages = Vec::new();

    let est = sevo::reconstruction_threshold(&cfg.channel, &cfg.prior, lo, hi, cfg.tol_delta)?;
    out.line(&format!(
        "reconstruction_threshold,{},{},{}",
        est.value, est.lo, est.hi
    ))?;
    messages.push(format!("reconstruction threshold delta* = {:.6}", est.value));

    if let (Prior::ConstantAmplitude { amplitude }, false) = (&cfg.prior, cfg.channel.is_one_bit())
    {
        let closed = sevo::prop1_threshold(*amplitude, cfg.channel.sigma2())?;
        out.line(&format!("closed_form_threshold,{closed},,"))?;
        messages.push(format!(
            "closed form 2(1 + sigma^2/u_min^2) = {closed:.6}"
        ));
    }
    if cfg.weak_threshold {
        let weak = sevo::weak_reconstruction_threshold(&cfg.channel, &cfg.prior, lo, hi, cfg.tol_delta)?;
        out.line(&format!(
            "weak_reconstruction_threshold,{},{},{}",
            weak.value, weak.lo, weak.hi
        ))?;
        messages.push(format!(
            "weak reconstruction threshold delta_w* = {:.6}",
            weak.value
        ));
    }
    let path = out.finish()?;
    Ok(RunArtifacts {
        raw_csv: Some(path),
        summary_csv: None,
        plot_script: None,
        messages,
    })
}
