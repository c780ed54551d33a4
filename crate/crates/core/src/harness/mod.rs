//! Experiment engine: configuration, deterministic Monte-Carlo sweeps and
//! CSV output.

pub mod config;
pub mod output;
mod sweep;

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

pub use config::{AlgorithmSpec, ExperimentConfig, Overrides};
pub use sweep::{
    ci95, collect_belief_diagnostics, draw_trial, monotonicity_warnings, run_ber_sweep, run_iteration_trace,
    run_rho_sweep, BeliefDiagnostics, BerRecord, CorrSnapshot, IterRecord, ResidualHistogram, SweepResult, Timing,
    TraceResult,
};

use crate::{Error, Result};
use output::Metadata;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    BerSweep,
    RhoSweep,
    IterTrace,
    CorrDiag,
    Histogram,
}

impl Command {
    pub const ALL: [Command; 5] = [
        Command::BerSweep,
        Command::RhoSweep,
        Command::IterTrace,
        Command::CorrDiag,
        Command::Histogram,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::BerSweep => "ber-sweep",
            Command::RhoSweep => "rho-sweep",
            Command::IterTrace => "iter-trace",
            Command::CorrDiag => "corr-diag",
            Command::Histogram => "histogram",
        }
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command '{s}'")))
    }
}

/// Files written by [`execute`].
#[derive(Debug, Clone)]
pub struct RunReport {
    pub outputs: Vec<PathBuf>,
    pub metadata: PathBuf,
    pub warnings: Vec<String>,
}

/// Runs `command` and writes its CSV files plus a `.meta.json` sidecar
/// under the `outputs` prefix.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut outputs = Vec::new();
    let (warnings, timing) = match command {
        Command::BerSweep | Command::RhoSweep => {
            let (res, suffix) = if command == Command::BerSweep {
                (run_ber_sweep(cfg)?, "_ber.csv")
            } else {
                (run_rho_sweep(cfg)?, "_rho.csv")
            };
            let path = cfg.output_path(suffix);
            output::write_records(&path, &res.records)?;
            outputs.push(path);
            (res.warnings, res.timing)
        }
        Command::IterTrace => {
            let res = run_iteration_trace(cfg)?;
            let path = cfg.output_path("_iter.csv");
            output::write_records(&path, &res.records)?;
            outputs.push(path);
            (Vec::new(), res.timing)
        }
        Command::CorrDiag => {
            let res = collect_belief_diagnostics(cfg, &cfg.snapshot_ts, None)?;
            for s in &res.corr {
                let path = cfg.output_path(&format!("_gamma_{}_t{}.csv", s.spec, s.t));
                output::write_gamma(&path, &s.gamma)?;
                outputs.push(path);
            }
            let path = cfg.output_path("_corr_summary.csv");
            output::write_corr_summary(&path, cfg, &res.corr)?;
            outputs.push(path);
            (res.warnings, res.timing)
        }
        Command::Histogram => {
            let res = collect_belief_diagnostics(cfg, &[], Some(cfg.hist_t))?;
            let path = cfg.output_path("_hist.csv");
            output::write_histograms(&path, &res.hist)?;
            outputs.push(path);
            let path = cfg.output_path("_hist_tails.csv");
            output::write_tails(&path, &res.hist)?;
            outputs.push(path);
            (res.warnings, res.timing)
        }
    };
    let metadata = cfg.output_path(&format!("_{}.meta.json", command.name()));
    output::write_metadata(
        &metadata,
        &Metadata {
            command: command.name(),
            version: env!("CARGO_PKG_VERSION"),
            config: cfg,
            xi: cfg.xi(),
            wall_seconds: start.elapsed().as_secs_f64(),
            outputs: &outputs,
            warnings: &warnings,
            timing: &timing,
        },
    )?;
    Ok(RunReport {
        outputs,
        metadata,
        warnings,
    })
}
