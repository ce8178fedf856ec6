//! Command-line interface. Subcommands map onto the experiment kinds; flags
//! override the corresponding config fields.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{AlgorithmSpec, ExperimentConfig, ExperimentKind, CONFIG_VERSION};
use super::runner::{run_experiment, HarnessError, RunArtifacts};
use crate::model::{Channel, Prior};

#[derive(Debug, Parser)]
#[command(
    name = "sublinear-gamp",
    version,
    about = "Bayesian GAMP for sparse recovery in the sublinear sparsity regime"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (falls back to SUBLINEAR_GAMP_THREADS, then all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress result lines on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// State-evolution traces, optionally with the EXIT chart export.
    Se(SeArgs),
    /// Run an experiment described by a JSON config file.
    Run(RunArgs),
    /// Desk-scale Monte Carlo benchmark sweep over delta.
    Bench(BenchArgs),
    /// Finite-size denoiser error curve versus log2(N).
    Lemma1(Lemma1Args),
    /// Reconstruction threshold by bisection on the state evolution.
    Threshold(ThresholdArgs),
    /// Emit a gnuplot script for a figure analog from an existing CSV.
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
struct CommonIo {
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed; every trial derives its stream from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SeArgs {
    /// Channel: linear | onebit.
    #[arg(long, value_parser = parse_channel_kind)]
    channel: ChannelKind,
    /// Prior: gauss:P | const:u | mix:u@p,u@p,...
    #[arg(long, value_parser = parse_prior)]
    prior: Prior,
    /// Noise variance sigma^2.
    #[arg(long, default_value_t = 0.0)]
    sigma2: f64,
    /// Sample-complexity prefactor; repeatable.
    #[arg(long = "delta", required = true)]
    deltas: Vec<f64>,
    /// Also export the EXIT chart curves.
    #[arg(long)]
    chart: bool,
    #[command(flatten)]
    io: CommonIo,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// JSON experiment config.
    #[arg(long)]
    config: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Override the delta list; repeatable.
    #[arg(long = "delta")]
    deltas: Vec<f64>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Channel: linear | onebit.
    #[arg(long, value_parser = parse_channel_kind)]
    channel: ChannelKind,
    /// Prior: gauss:P | const:u | mix:u@p,...
    #[arg(long, value_parser = parse_prior, default_value = "gauss:1")]
    prior: Prior,
    #[arg(long)]
    sigma2: Option<f64>,
    /// Signal dimension.
    #[arg(long, default_value_t = 4096)]
    n: usize,
    /// Sparsity.
    #[arg(long, default_value_t = 16)]
    k: usize,
    /// Prefactor grid; repeatable. Defaults per channel.
    #[arg(long = "delta")]
    deltas: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// GAMP/BIHT/GLasso iteration budget.
    #[arg(long, default_value_t = 20)]
    iters: usize,
    /// Emit a gnuplot script beside the summary.
    #[arg(long)]
    plot: bool,
    #[command(flatten)]
    io: CommonIo,
}

#[derive(Debug, Args)]
struct Lemma1Args {
    #[arg(long, value_parser = parse_prior, default_value = "gauss:1")]
    prior: Prior,
    /// Sublinear exponent gamma in [0, 1).
    #[arg(long, default_value_t = 0.25)]
    gamma: f64,
    /// Noise scale v; repeatable.
    #[arg(long = "v", default_values_t = [0.5, 1.0, 2.0])]
    v_list: Vec<f64>,
    /// log2(N) grid; repeatable.
    #[arg(long = "log2n", default_values_t = [20u32, 50, 100, 200, 500, 1000])]
    log2n_list: Vec<u32>,
    #[command(flatten)]
    io: CommonIo,
}

#[derive(Debug, Args)]
struct ThresholdArgs {
    #[arg(long, value_parser = parse_channel_kind)]
    channel: ChannelKind,
    #[arg(long, value_parser = parse_prior)]
    prior: Prior,
    #[arg(long, default_value_t = 0.0)]
    sigma2: f64,
    /// Bisection bracket.
    #[arg(long, default_value_t = 0.5)]
    lo: f64,
    #[arg(long, default_value_t = 8.0)]
    hi: f64,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Also locate the weak (unique-fixed-point) threshold.
    #[arg(long)]
    weak: bool,
    #[command(flatten)]
    io: CommonIo,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Figure analog number (1..=6).
    #[arg(long)]
    figure: u8,
    /// CSV file the script should read.
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy)]
enum ChannelKind {
    Linear,
    OneBit,
}

fn parse_channel_kind(s: &str) -> Result<ChannelKind, String> {
    match s.to_ascii_lowercase().as_str() {
        "linear" => Ok(ChannelKind::Linear),
        "onebit" | "one_bit" | "one-bit" | "sign" => Ok(ChannelKind::OneBit),
        other => Err(format!("unknown channel `{other}` (expected linear | onebit)")),
    }
}

fn make_channel(kind: ChannelKind, sigma2: f64) -> Result<Channel, String> {
    match kind {
        ChannelKind::Linear => Channel::linear(sigma2),
        ChannelKind::OneBit => Channel::one_bit_sign(sigma2),
    }
    .map_err(|e| e.to_string())
}

/// Parse `gauss:P`, `const:u`, or `mix:u@p,u@p,...`.
fn parse_prior(s: &str) -> Result<Prior, String> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| format!("prior `{s}` must look like gauss:1, const:1 or mix:u@p,..."))?;
    let parse_f64 = |v: &str| -> Result<f64, String> {
        v.parse::<f64>().map_err(|_| format!("not a number: `{v}`"))
    };
    match kind {
        "gauss" | "gaussian" => Prior::gaussian(parse_f64(rest)?).map_err(|e| e.to_string()),
        "const" | "constant" => {
            Prior::constant_amplitude(parse_f64(rest)?).map_err(|e| e.to_string())
        }
        "mix" | "discrete" => {
            let mut points = Vec::new();
            for part in rest.split(',') {
                let (u, p) = part
                    .split_once('@')
                    .ok_or_else(|| format!("mixture point `{part}` must look like u@p"))?;
                points.push((parse_f64(u)?, parse_f64(p)?));
            }
            Prior::discrete_mixture(points).map_err(|e| e.to_string())
        }
        other => Err(format!("unknown prior kind `{other}`")),
    }
}

fn blank_config(kind: ExperimentKind, channel: Channel, prior: Prior) -> ExperimentConfig {
    ExperimentConfig {
        version: CONFIG_VERSION,
        kind,
        channel,
        prior,
        n: None,
        k: None,
        gamma: None,
        deltas: Vec::new(),
        algorithms: Vec::new(),
        trials: 1,
        iterations: 20,
        master_seed: 0,
        out_dir: PathBuf::from("out"),
        log2n_list: Vec::new(),
        v_list: Vec::new(),
        delta_bracket: None,
        tol_delta: 1e-3,
        weak_threshold: false,
        emit_plot: false,
        record_timing: false,
    }
}

fn configure_threads(requested: Option<usize>) {
    let n = requested.or_else(|| {
        std::env::var("SUBLINEAR_GAMP_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = n {
        // Ignore failure: the global pool can only be set once per process.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

fn print_artifacts(quiet: bool, artifacts: &RunArtifacts) {
    if quiet {
        return;
    }
    for m in &artifacts.messages {
        println!("{m}");
    }
    if let Some(p) = &artifacts.raw_csv {
        println!("wrote {}", p.display());
    }
    if let Some(p) = &artifacts.summary_csv {
        println!("wrote {}", p.display());
    }
    if let Some(p) = &artifacts.plot_script {
        println!("wrote {}", p.display());
    }
}

/// Run the CLI; the return value is the process exit code.
pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    configure_threads(cli.threads);
    match dispatch(cli.command, cli.quiet) {
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Harness(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

enum CliError {
    Usage(String),
    Harness(HarnessError),
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        CliError::Harness(e)
    }
}

fn dispatch(cmd: Command, quiet: bool) -> Result<(), CliError> {
    match cmd {
        Command::Se(args) => {
            let channel = make_channel(args.channel, args.sigma2).map_err(CliError::Usage)?;
            let mut cfg = blank_config(ExperimentKind::SeSweep, channel, args.prior);
            cfg.deltas = args.deltas;
            cfg.master_seed = args.io.seed;
            cfg.out_dir = args.io.out;
            let artifacts = run_experiment(&cfg)?;
            print_artifacts(quiet, &artifacts);
            if args.chart {
                cfg.kind = ExperimentKind::SeChart;
                let artifacts = run_experiment(&cfg)?;
                print_artifacts(quiet, &artifacts);
            }
            Ok(())
        }
        Command::Run(args) => {
            let mut cfg = ExperimentConfig::from_file(&args.config)
                .map_err(HarnessError::Config)?;
            if let Some(seed) = args.seed {
                cfg.master_seed = seed;
            }
            if let Some(out) = args.out {
                cfg.out_dir = out;
            }
            if let Some(trials) = args.trials {
                cfg.trials = trials;
            }
            if !args.deltas.is_empty() {
                cfg.deltas = args.deltas;
            }
            let artifacts = run_experiment(&cfg)?;
            print_artifacts(quiet, &artifacts);
            Ok(())
        }
        Command::Bench(args) => {
            let one_bit = matches!(args.channel, ChannelKind::OneBit);
            let sigma2 = args.sigma2.unwrap_or(if one_bit { 0.0 } else { 1e-4 });
            let channel = make_channel(args.channel, sigma2).map_err(CliError::Usage)?;
            let mut cfg = blank_config(ExperimentKind::GampSweep, channel, args.prior);
            cfg.n = Some(args.n);
            cfg.k = Some(args.k);
            cfg.trials = args.trials;
            cfg.iterations = args.iters;
            cfg.master_seed = args.io.seed;
            cfg.out_dir = args.io.out;
            cfg.emit_plot = args.plot;
            cfg.deltas = if args.deltas.is_empty() {
                if one_bit {
                    vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
                } else {
                    vec![0.6, 0.9, 1.2, 1.5, 1.8, 2.1, 2.4]
                }
            } else {
                args.deltas
            };
            cfg.algorithms = if one_bit {
                vec![
                    AlgorithmSpec::Gamp { damping: 1.0 },
                    AlgorithmSpec::Biht { step: 1.0 },
                    AlgorithmSpec::Glasso {
                        lambda: None,
                        iterations: None,
                    },
                ]
            } else {
                vec![
                    AlgorithmSpec::Gamp { damping: 1.0 },
                    AlgorithmSpec::Fista {
                        lambda: None,
                        iterations: Some(1000),
                    },
                    AlgorithmSpec::Omp {},
                ]
            };
            let artifacts = run_experiment(&cfg)?;
            print_artifacts(quiet, &artifacts);
            Ok(())
        }
        Command::Lemma1(args) => {
            let channel = Channel::linear(0.0).expect("valid");
            let mut cfg = blank_config(ExperimentKind::Lemma1, channel, args.prior);
            cfg.gamma = Some(args.gamma);
            cfg.v_list = args.v_list;
            cfg.log2n_list = args.log2n_list;
            cfg.master_seed = args.io.seed;
            cfg.out_dir = args.io.out;
            let artifacts = run_experiment(&cfg)?;
            print_artifacts(quiet, &artifacts);
            Ok(())
        }
        Command::Threshold(args) => {
            let channel = make_channel(args.channel, args.sigma2).map_err(CliError::Usage)?;
            let mut cfg = blank_config(ExperimentKind::Threshold, channel, args.prior);
            cfg.delta_bracket = Some((args.lo, args.hi));
            cfg.tol_delta = args.tol;
            cfg.weak_threshold = args.weak;
            cfg.master_seed = args.io.seed;
            cfg.out_dir = args.io.out;
            let artifacts = run_experiment(&cfg)?;
            print_artifacts(quiet, &artifacts);
            Ok(())
        }
        Command::Plot(args) => {
            let path = super::gnuplot::emit_figure_script(args.figure, &args.data, &args.out)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            if !quiet {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}
