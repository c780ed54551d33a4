//! Message-passing detectors and linear baselines.
//!
//! All detectors take `y`, `A`, `N0` and the prior, and return a
//! [`DetectorRun`] with hard decisions, soft estimates and an optional
//! per-iteration trace. The three message-passing algorithms share the
//! same LE/NLE skeleton and differ only in how they suppress self-feedback:
//!
//! * GaBP excludes each edge's own observation when combining (before the denoiser),
//! * MF-EP divides the own-observation term out of the denoised belief (after it),
//! * GAMP subtracts the Onsager term `γ_n·s_n` in the next LE step.

mod gabp;
mod gamp;
mod lmmse;
mod mfb;
mod mfep;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::denoiser::{posterior, AnnealSchedule, Posterior};
use crate::{Error, Result};

pub use gabp::run_gabp;
pub use gamp::run_gamp;
pub use lmmse::{run_lmmse, run_lmmse_ep};
pub use mfb::{mfb_detect, run_mfb};
pub use mfep::run_mfep;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Beliefs with `|x̄| > DIVERGENCE_FACTOR·√Es` abort the trial.
pub const DIVERGENCE_FACTOR: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    Gabp,
    Mfep,
    Gamp,
    Lmmse,
    LmmseEp,
    Mfb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Gabp,
        Algorithm::Mfep,
        Algorithm::Gamp,
        Algorithm::Lmmse,
        Algorithm::LmmseEp,
        Algorithm::Mfb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Gabp => "gabp",
            Algorithm::Mfep => "mfep",
            Algorithm::Gamp => "gamp",
            Algorithm::Lmmse => "lmmse",
            Algorithm::LmmseEp => "lmmse-ep",
            Algorithm::Mfb => "mfb",
        }
    }

    /// GaBP, MF-EP and GAMP.
    pub fn is_message_passing(self) -> bool {
        matches!(self, Algorithm::Gabp | Algorithm::Mfep | Algorithm::Gamp)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum DenoiserMode {
    /// Bayes-optimal denoiser driven by the LE variance.
    Plain,
    /// Annealed discrete denoiser with `β(t) = (d1/c²)(t/T)^d2`.
    Annealed { d1: f64, d2: f64 },
}

impl DenoiserMode {
    pub fn name(&self) -> &'static str {
        match self {
            DenoiserMode::Plain => "plain",
            DenoiserMode::Annealed { .. } => "add",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum TraceLevel {
    #[default]
    None,
    BerOnly,
    Full,
}

/// Which denoiser GaBP's final all-observation decision uses in annealed mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum FinalDenoiser {
    /// ADD at `β(T)`.
    #[default]
    Annealed,
    /// Bayes denoiser with the consensus variance.
    Plain,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorConfig {
    pub algorithm: Algorithm,
    pub iterations: usize,
    pub damping: f64,
    pub denoiser: DenoiserMode,
    pub trace: TraceLevel,
    /// Damp LE variances as well as means.
    pub damp_variance: bool,
    pub gabp_final: FinalDenoiser,
}

impl DetectorConfig {
    pub const DEFAULT_ITERATIONS: usize = 64;
    pub const DEFAULT_DAMPING: f64 = 0.5;

    pub fn new(algorithm: Algorithm) -> Self {
        Self {
            algorithm,
            iterations: Self::DEFAULT_ITERATIONS,
            damping: Self::DEFAULT_DAMPING,
            denoiser: DenoiserMode::Plain,
            trace: TraceLevel::None,
            damp_variance: true,
            gabp_final: FinalDenoiser::Annealed,
        }
    }

    pub fn annealed(mut self, d1: f64, d2: f64) -> Self {
        self.denoiser = DenoiserMode::Annealed { d1, d2 };
        self
    }

    pub fn iterations(mut self, t: usize) -> Self {
        self.iterations = t;
        self
    }

    pub fn damping(mut self, delta: f64) -> Self {
        self.damping = delta;
        self
    }

    pub fn trace(mut self, level: TraceLevel) -> Self {
        self.trace = level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        Damping::new(self.damping, self.damp_variance)?;
        if let DenoiserMode::Annealed { d1, d2 } = self.denoiser {
            AnnealSchedule::new(d1, d2, self.iterations, 1.0)?;
        }
        Ok(())
    }
}

/// One iteration of a detector trace.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterationRecord {
    pub t: usize,
    /// Hard-decision bit errors at this iteration, when the truth is known.
    pub bit_errors: Option<usize>,
    /// Per-symbol LE output means (full trace only).
    pub xbar: Vec<Complex64>,
    /// Per-symbol LE output variances (full trace only).
    pub vbar: Vec<f64>,
    /// Effective noise after interference cancellation (full trace, MPAs only).
    pub effective_noise: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    pub iteration: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectorRun {
    pub algorithm: Algorithm,
    pub hard_indices: Vec<usize>,
    pub hard_bits: Vec<u8>,
    pub soft_means: Vec<Complex64>,
    pub soft_vars: Vec<f64>,
    pub trace: Vec<IterationRecord>,
    /// Set when the beliefs blew up; the estimates are then meaningless.
    pub diverged: Option<Divergence>,
}

impl DetectorRun {
    pub(crate) fn new(
        algorithm: Algorithm,
        cons: &Constellation,
        hard_indices: Vec<usize>,
        soft_means: Vec<Complex64>,
        soft_vars: Vec<f64>,
        trace: Vec<IterationRecord>,
    ) -> Self {
        let mut hard_bits = Vec::with_capacity(hard_indices.len() * cons.bits_per_symbol());
        for &q in &hard_indices {
            cons.bits_of(q, &mut hard_bits);
        }
        Self {
            algorithm,
            hard_indices,
            hard_bits,
            soft_means,
            soft_vars,
            trace,
            diverged: None,
        }
    }

    pub(crate) fn diverged(
        algorithm: Algorithm,
        cons: &Constellation,
        m: usize,
        trace: Vec<IterationRecord>,
        div: Divergence,
    ) -> Self {
        let mut run = Self::new(algorithm, cons, vec![0; m], vec![ZERO; m], vec![cons.symbol_energy(); m], trace);
        run.diverged = Some(div);
        run
    }

    /// Bit errors against the transmitted point indices.
    pub fn bit_errors(&self, cons: &Constellation, x_true: &[usize]) -> usize {
        self.hard_indices
            .iter()
            .zip(x_true)
            .map(|(&a, &b)| cons.bit_errors(a, b))
            .sum()
    }
}

/// Linear damping `δ·new + (1−δ)·prev` of an LE output.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Damping {
    delta: f64,
    damp_variance: bool,
}

impl Damping {
    pub(crate) fn new(delta: f64, damp_variance: bool) -> Result<Self> {
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::invalid("damping", format!("{delta} outside (0, 1]")));
        }
        Ok(Self {
            delta,
            damp_variance,
        })
    }

    #[inline]
    pub(crate) fn mix(&self, mean: Complex64, var: f64, prev_mean: Complex64, prev_var: f64) -> (Complex64, f64) {
        if self.delta == 1.0 {
            return (mean, var);
        }
        let d = self.delta;
        let m = mean * d + prev_mean * (1.0 - d);
        let v = if self.damp_variance {
            d * var + (1.0 - d) * prev_var
        } else {
            var
        };
        (m, v)
    }
}

/// Damps an LE output against the previous iteration's; `prev = None` (first
/// iteration) returns the new values unchanged.
pub fn apply_damping(
    new_mean: Complex64,
    new_var: f64,
    prev: Option<(Complex64, f64)>,
    delta: f64,
) -> Result<(Complex64, f64)> {
    let d = Damping::new(delta, true)?;
    Ok(match prev {
        None => (new_mean, new_var),
        Some((pm, pv)) => d.mix(new_mean, new_var, pm, pv),
    })
}

/// How the denoiser precision is chosen at each iteration.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Temperature {
    Plain,
    Annealed(AnnealSchedule),
}

impl Temperature {
    pub(crate) fn new(cfg: &DetectorConfig, cons: &Constellation) -> Result<Self> {
        Ok(match cfg.denoiser {
            DenoiserMode::Plain => Temperature::Plain,
            DenoiserMode::Annealed { d1, d2 } => {
                Temperature::Annealed(AnnealSchedule::new(d1, d2, cfg.iterations, cons.c_sq())?)
            }
        })
    }

    /// Denoiser precision (`1/v` or `β`) at iteration `t` for an LE variance `vbar`.
    #[inline]
    pub(crate) fn precision(&self, t: usize, vbar: f64) -> f64 {
        match self {
            Temperature::Plain => plain_precision(vbar),
            Temperature::Annealed(s) => s.beta_unchecked(t),
        }
    }
}

#[inline]
pub(crate) fn plain_precision(vbar: f64) -> f64 {
    if vbar.is_infinite() {
        0.0
    } else {
        1.0 / vbar
    }
}

/// Validated problem data in row-major layout for the O(MN) loops.
pub(crate) struct Problem<'a> {
    pub y: &'a [Complex64],
    /// `a[i*m + j] = A[(i, j)]`
    pub a: Vec<Complex64>,
    pub abs2: Vec<f64>,
    pub m: usize,
    pub n: usize,
    pub n0: f64,
    pub es: f64,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(
        y: &'a [Complex64],
        a: &DMatrix<Complex64>,
        n0: f64,
        cons: &Constellation,
        x_true: Option<&[usize]>,
    ) -> Result<Self> {
        let (n, m) = a.shape();
        if m == 0 || n == 0 {
            return Err(Error::invalid("measurement matrix", "empty"));
        }
        if y.len() != n {
            return Err(Error::DimensionMismatch {
                context: "observation vector",
                expected: n,
                found: y.len(),
            });
        }
        if let Some(x) = x_true {
            if x.len() != m {
                return Err(Error::DimensionMismatch {
                    context: "true symbol vector",
                    expected: m,
                    found: x.len(),
                });
            }
        }
        if !(n0 > 0.0 && n0.is_finite()) {
            return Err(Error::invalid("noise power", format!("{n0} is not positive")));
        }
        if y.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("observation", "non-finite entry"));
        }
        let mut row = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                row.push(a[(i, j)]);
            }
        }
        if row.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("measurement matrix", "non-finite entry"));
        }
        let abs2 = row.iter().map(|z| z.norm_sqr()).collect();
        Ok(Self {
            y,
            a: row,
            abs2,
            m,
            n,
            n0,
            es: cons.symbol_energy(),
        })
    }

    #[inline]
    pub(crate) fn diverging(&self, x: Complex64) -> bool {
        !(x.norm() <= DIVERGENCE_FACTOR * self.es.sqrt())
    }
}

/// Collects per-iteration records according to the trace level.
pub(crate) struct Recorder<'a> {
    level: TraceLevel,
    cons: &'a Constellation,
    x_true: Option<&'a [usize]>,
    pub records: Vec<IterationRecord>,
}

impl<'a> Recorder<'a> {
    pub(crate) fn new(level: TraceLevel, cons: &'a Constellation, x_true: Option<&'a [usize]>) -> Self {
        Self {
            level,
            cons,
            x_true,
            records: Vec::new(),
        }
    }

    pub(crate) fn active(&self) -> bool {
        self.level != TraceLevel::None
    }

    pub(crate) fn push(
        &mut self,
        t: usize,
        hard: impl Iterator<Item = usize>,
        xbar: &[Complex64],
        vbar: &[f64],
        effective_noise: &[Complex64],
    ) {
        let bit_errors = self.x_true.map(|x| {
            hard.zip(x)
                .map(|(a, &b)| self.cons.bit_errors(a, b))
                .sum()
        });
        let full = self.level == TraceLevel::Full;
        self.records.push(IterationRecord {
            t,
            bit_errors,
            xbar: if full { xbar.to_vec() } else { Vec::new() },
            vbar: if full { vbar.to_vec() } else { Vec::new() },
            effective_noise: if full { effective_noise.to_vec() } else { Vec::new() },
        });
    }
}

/// Denoises a vector of LE outputs at a common iteration.
pub(crate) fn denoise_all(
    cons: &Constellation,
    temp: &Temperature,
    t: usize,
    xbar: &[Complex64],
    vbar: &[f64],
) -> Vec<Posterior> {
    xbar.iter()
        .zip(vbar)
        .map(|(&x, &v)| posterior(cons, x, temp.precision(t, v)))
        .collect()
}

/// Runs the detector selected by `cfg.algorithm`. The matched-filter bound
/// needs `x_true`.
pub fn detect(
    cfg: &DetectorConfig,
    y: &[Complex64],
    a: &DMatrix<Complex64>,
    n0: f64,
    cons: &Constellation,
    x_true: Option<&[usize]>,
) -> Result<DetectorRun> {
    match cfg.algorithm {
        Algorithm::Gabp => run_gabp(y, a, n0, cons, cfg, x_true),
        Algorithm::Mfep => run_mfep(y, a, n0, cons, cfg, x_true),
        Algorithm::Gamp => run_gamp(y, a, n0, cons, cfg, x_true),
        Algorithm::Lmmse => run_lmmse(y, a, n0, cons),
        Algorithm::LmmseEp => run_lmmse_ep(y, a, n0, cons, cfg, x_true),
        Algorithm::Mfb => {
            let x = x_true.ok_or_else(|| Error::invalid("x_true", "the matched-filter bound needs the transmitted symbols"))?;
            mfb_detect(y, a, n0, cons, x)
        }
    }
}
