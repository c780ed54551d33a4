//! Experiment configuration: a JSON document plus command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize};

use crate::constellation::Constellation;
use crate::denoiser::AnnealSchedule;
use crate::detectors::{Algorithm, DenoiserMode, DetectorConfig, FinalDenoiser, TraceLevel};
use crate::{Error, Result};

/// An algorithm plus denoiser choice, written `gamp`, `gamp-add`, `lmmse-ep`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct AlgorithmSpec {
    pub algorithm: Algorithm,
    pub annealed: bool,
}

impl AlgorithmSpec {
    pub fn plain(algorithm: Algorithm) -> Self {
        Self { algorithm, annealed: false }
    }

    pub fn add(algorithm: Algorithm) -> Self {
        Self { algorithm, annealed: true }
    }

    pub fn denoiser_mode(&self) -> &'static str {
        if self.annealed {
            "add"
        } else {
            "plain"
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for AlgorithmSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.annealed {
            write!(f, "{}-add", self.algorithm)
        } else {
            write!(f, "{}", self.algorithm)
        }
    }
}

impl FromStr for AlgorithmSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (base, annealed) = match s.strip_suffix("-add") {
            Some(b) => (b, true),
            None => (s.as_str(), false),
        };
        let algorithm: Algorithm = base.parse()?;
        if annealed && !algorithm.is_message_passing() {
            return Err(Error::Config(format!("{algorithm} has no annealed variant")));
        }
        Ok(Self { algorithm, annealed })
    }
}

impl TryFrom<String> for AlgorithmSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<AlgorithmSpec> for String {
    fn from(a: AlgorithmSpec) -> String {
        a.to_string()
    }
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(match OneOrMany::deserialize(d)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

fn default_q() -> usize {
    4
}
fn default_rho() -> Vec<f64> {
    vec![0.0]
}
fn default_t() -> usize {
    64
}
fn default_damping() -> f64 {
    0.5
}
fn default_d1() -> f64 {
    AnnealSchedule::DEFAULT_D1
}
fn default_d2() -> f64 {
    AnnealSchedule::DEFAULT_D2
}
fn default_es() -> f64 {
    1.0
}
fn default_outputs() -> String {
    "results/run".into()
}
fn default_workers() -> usize {
    1
}
fn default_snapshots() -> Vec<usize> {
    vec![4, 20, 40, 60]
}
fn default_hist_t() -> usize {
    60
}
fn default_hist_bins() -> usize {
    121
}
fn default_true() -> bool {
    true
}
fn default_batch() -> u64 {
    64
}

/// One experiment. Field names follow the JSON keys (`M`, `N`, `Q`, `T`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Q", default = "default_q")]
    pub q: usize,
    #[serde(default = "default_rho", deserialize_with = "one_or_many")]
    pub rho: Vec<f64>,
    #[serde(alias = "EsN0_dB", deserialize_with = "one_or_many")]
    pub esn0_db: Vec<f64>,
    #[serde(rename = "T", default = "default_t")]
    pub t: usize,
    pub algorithms: Vec<AlgorithmSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_bit_errors: Option<u64>,
    /// Cap for the target-error stopping rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_trials: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_true")]
    pub damp_variance: bool,
    #[serde(default = "default_d1")]
    pub d1: f64,
    #[serde(default = "default_d2")]
    pub d2: f64,
    #[serde(default)]
    pub gabp_final: FinalDenoiser,
    #[serde(default = "default_es")]
    pub es: f64,
    /// Output path prefix; each subcommand appends its own suffix.
    #[serde(default = "default_outputs")]
    pub outputs: String,
    #[serde(default = "default_workers")]
    pub workers: usize,
    /// Trials per scheduling batch. Results never depend on it.
    #[serde(default = "default_batch")]
    pub batch: u64,
    #[serde(default = "default_snapshots")]
    pub snapshot_ts: Vec<usize>,
    #[serde(default = "default_hist_t")]
    pub hist_t: usize,
    #[serde(default = "default_hist_bins")]
    pub hist_bins: usize,
    /// Iteration budgets for `iter-trace`; empty means `[T]`.
    #[serde(default)]
    pub trace_ts: Vec<usize>,
}

impl ExperimentConfig {
    /// A config with the default parameter set and a fixed trial count.
    pub fn new(m: usize, n: usize, algorithms: Vec<AlgorithmSpec>, esn0_db: Vec<f64>, trials: u64) -> Self {
        Self {
            m,
            n,
            q: default_q(),
            rho: default_rho(),
            esn0_db,
            t: default_t(),
            algorithms,
            trials: Some(trials),
            target_bit_errors: None,
            max_trials: None,
            seed: 0,
            damping: default_damping(),
            damp_variance: true,
            d1: AnnealSchedule::DEFAULT_D1,
            d2: AnnealSchedule::DEFAULT_D2,
            gabp_final: FinalDenoiser::default(),
            es: default_es(),
            outputs: default_outputs(),
            workers: default_workers(),
            batch: default_batch(),
            snapshot_ts: default_snapshots(),
            hist_t: default_hist_t(),
            hist_bins: default_hist_bins(),
            trace_ts: Vec::new(),
        }
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.n == 0 {
            return bad(format!("M and N must be positive (M={}, N={})", self.m, self.n));
        }
        Constellation::qam(self.q, self.es)?;
        if self.rho.is_empty() {
            return bad("rho list is empty".into());
        }
        if let Some(r) = self.rho.iter().find(|r| !(0.0..1.0).contains(*r)) {
            return bad(format!("rho = {r} outside [0, 1)"));
        }
        if self.esn0_db.is_empty() || self.esn0_db.iter().any(|x| !x.is_finite()) {
            return bad("esn0_db must be a non-empty list of finite values".into());
        }
        if self.t == 0 {
            return bad("T must be at least 1".into());
        }
        if self.algorithms.is_empty() {
            return bad("no algorithms selected".into());
        }
        match (self.trials, self.target_bit_errors) {
            (Some(0), _) => return bad("trials must be positive".into()),
            (Some(_), None) => {}
            (None, Some(0)) => return bad("target_bit_errors must be positive".into()),
            (None, Some(_)) => {
                if self.max_trials.is_none_or(|m| m == 0) {
                    return bad("target_bit_errors needs a positive max_trials".into());
                }
            }
            (Some(_), Some(_)) => return bad("set exactly one of trials and target_bit_errors".into()),
            (None, None) => return bad("set one of trials and target_bit_errors".into()),
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(format!("damping = {} outside (0, 1]", self.damping));
        }
        if !(self.d1 > 0.0 && self.d1.is_finite() && self.d2.is_finite() && self.d2 >= 0.0) {
            return bad(format!("invalid annealing parameters d1={}, d2={}", self.d1, self.d2));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if self.batch == 0 {
            return bad("batch must be at least 1".into());
        }
        if self.hist_bins == 0 {
            return bad("hist_bins must be at least 1".into());
        }
        if self.outputs.is_empty() {
            return bad("outputs prefix is empty".into());
        }
        Ok(())
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::qam(self.q, self.es)
    }

    /// Load ratio ξ = N/M.
    pub fn xi(&self) -> f64 {
        self.n as f64 / self.m as f64
    }

    pub fn detector_config(&self, spec: AlgorithmSpec, iterations: usize, trace: TraceLevel) -> DetectorConfig {
        let mut cfg = DetectorConfig::new(spec.algorithm)
            .iterations(iterations)
            .damping(self.damping)
            .trace(trace);
        if spec.annealed {
            cfg.denoiser = DenoiserMode::Annealed { d1: self.d1, d2: self.d2 };
        }
        cfg.damp_variance = self.damp_variance;
        cfg.gabp_final = self.gabp_final;
        cfg
    }

    /// Bits per trial: `M·log2 Q`.
    pub fn bits_per_trial(&self) -> u64 {
        (self.m * self.q.trailing_zeros() as usize) as u64
    }

    pub fn output_path(&self, suffix: &str) -> PathBuf {
        PathBuf::from(format!("{}{suffix}", self.outputs))
    }
}

/// Command-line overrides, applied on top of the JSON document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub q: Option<usize>,
    pub rho: Option<Vec<f64>>,
    pub esn0_db: Option<Vec<f64>>,
    pub algorithms: Option<Vec<AlgorithmSpec>>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub outputs: Option<String>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.q {
            cfg.q = v;
        }
        if let Some(v) = &self.rho {
            cfg.rho = v.clone();
        }
        if let Some(v) = &self.esn0_db {
            cfg.esn0_db = v.clone();
        }
        if let Some(v) = &self.algorithms {
            cfg.algorithms = v.clone();
        }
        if let Some(v) = self.trials {
            cfg.trials = Some(v);
            cfg.target_bit_errors = None;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.outputs {
            cfg.outputs = v.clone();
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
    }
}
