//! CSV and metadata writers.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::sweep::{CorrSnapshot, ResidualHistogram, Timing};
use crate::diagnostics::{band_profile, mean_offdiag_abs};
use crate::Result;

/// Largest diagonal offset reported in the Γ summary.
pub const SUMMARY_BANDS: usize = 8;

fn create(path: &Path) -> Result<fs::File> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(fs::File::create(path)?)
}

/// Header row plus one line per record.
pub fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// `|Γ|` as N lines of N comma-separated magnitudes.
pub fn write_gamma(path: &Path, gamma: &DMatrix<Complex64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(create(path)?);
    for i in 0..gamma.nrows() {
        w.write_record(gamma.row(i).iter().map(|z| z.norm().to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_corr_summary(path: &Path, cfg: &ExperimentConfig, snaps: &[CorrSnapshot]) -> Result<()> {
    let bands = SUMMARY_BANDS.min(cfg.n.saturating_sub(1));
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header: Vec<String> = ["algorithm", "denoiser_mode", "M", "N", "rho", "EsN0_dB", "T", "t", "trials", "skipped", "mean_offdiag_abs"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=bands).map(|k| format!("band_{k}")));
    w.write_record(&header)?;
    for s in snaps {
        let mut row = vec![
            s.spec.algorithm.to_string(),
            s.spec.denoiser_mode().to_string(),
            cfg.m.to_string(),
            cfg.n.to_string(),
            cfg.rho[0].to_string(),
            cfg.esn0_db[0].to_string(),
            cfg.t.to_string(),
            s.t.to_string(),
            s.trials.to_string(),
            s.skipped.to_string(),
            mean_offdiag_abs(&s.gamma).to_string(),
        ];
        row.extend(band_profile(&s.gamma, bands).iter().map(|b| b.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct HistRow<'a> {
    algorithm: String,
    denoiser_mode: &'a str,
    t: usize,
    bin_low: f64,
    bin_high: f64,
    density: f64,
    ideal_density: f64,
}

#[derive(Serialize)]
struct TailRow<'a> {
    algorithm: String,
    denoiser_mode: &'a str,
    t: usize,
    residuals: usize,
    skipped_trials: u64,
    k: u32,
    count_beyond: usize,
    fraction_beyond: f64,
    gaussian_fraction: f64,
}

/// Two-sided standard-normal tail `P(|Z| > k)`, tabulated for the reported `k`.
pub fn gaussian_tail(k: u32) -> f64 {
    match k {
        3 => 2.699_796_063_260_2e-3,
        4 => 6.334_248_366_623_9e-5,
        5 => 5.733_031_437_583_9e-7,
        _ => f64::NAN,
    }
}

pub fn write_histograms(path: &Path, hists: &[ResidualHistogram]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for h in hists {
        let b = &h.histogram;
        for (i, e) in b.bin_edges.windows(2).enumerate() {
            w.serialize(HistRow {
                algorithm: h.spec.algorithm.to_string(),
                denoiser_mode: h.spec.denoiser_mode(),
                t: h.t,
                bin_low: e[0],
                bin_high: e[1],
                density: b.density[i],
                ideal_density: b.ideal_overlay[i],
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_tails(path: &Path, hists: &[ResidualHistogram]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    for h in hists {
        for &(k, count) in &h.histogram.tail_counts {
            w.serialize(TailRow {
                algorithm: h.spec.algorithm.to_string(),
                denoiser_mode: h.spec.denoiser_mode(),
                t: h.t,
                residuals: h.histogram.total,
                skipped_trials: h.skipped,
                k,
                count_beyond: count,
                fraction_beyond: count as f64 / h.histogram.total as f64,
                gaussian_fraction: gaussian_tail(k),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sidecar describing how a set of CSV files was produced.
#[derive(Debug, Serialize)]
pub struct Metadata<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub config: &'a ExperimentConfig,
    pub xi: f64,
    pub wall_seconds: f64,
    pub outputs: &'a [PathBuf],
    pub warnings: &'a [String],
    pub timing: &'a [Timing],
}

pub fn write_metadata(path: &Path, meta: &Metadata<'_>) -> Result<()> {
    let mut f = create(path)?;
    serde_json::to_writer_pretty(&mut f, meta)?;
    writeln!(f)?;
    Ok(())
}
