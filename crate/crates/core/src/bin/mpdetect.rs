//! Command-line front end. Exit codes: 0 success, 1 config error, 2 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mpdetect::harness::{execute, AlgorithmSpec, Command, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(name = "mpdetect", version, about = "Monte-Carlo experiments for message-passing MIMO detection")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// BER versus Es/N0 for every configured algorithm.
    BerSweep(RunArgs),
    /// BER versus the correlation coefficient at one Es/N0.
    RhoSweep(RunArgs),
    /// Instantaneous BER at every iteration.
    IterTrace(RunArgs),
    /// Effective-noise correlation matrices at snapshot iterations.
    CorrDiag(RunArgs),
    /// Standardized belief-residual histograms.
    Histogram(RunArgs),
}

#[derive(clap::Args)]
#[command(allow_negative_numbers = true)]
struct RunArgs {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    #[arg(long = "M")]
    m: Option<usize>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long = "Q")]
    q: Option<usize>,
    /// Comma-separated list.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rho: Option<Vec<f64>>,
    /// Es/N0 in dB, comma-separated list.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    esn0: Option<Vec<f64>>,
    /// Algorithms such as `gamp-add,mfep-add,lmmse-ep,mfb`.
    #[arg(long, value_delimiter = ',')]
    alg: Option<Vec<String>>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path prefix.
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
}

fn load(args: &RunArgs) -> mpdetect::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    let algorithms = match &args.alg {
        Some(list) => Some(list.iter().map(|s| s.parse::<AlgorithmSpec>()).collect::<Result<Vec<_>, _>>()?),
        None => None,
    };
    Overrides {
        m: args.m,
        n: args.n,
        q: args.q,
        rho: args.rho.clone(),
        esn0_db: args.esn0.clone(),
        algorithms,
        trials: args.trials,
        seed: args.seed,
        outputs: args.out.clone(),
        workers: args.workers,
    }
    .apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let (command, args) = match &cli.command {
        Sub::BerSweep(a) => (Command::BerSweep, a),
        Sub::RhoSweep(a) => (Command::RhoSweep, a),
        Sub::IterTrace(a) => (Command::IterTrace, a),
        Sub::CorrDiag(a) => (Command::CorrDiag, a),
        Sub::Histogram(a) => (Command::Histogram, a),
    };
    let cfg = match load(args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match execute(command, &cfg) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for p in report.outputs.iter().chain([&report.metadata]) {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}
