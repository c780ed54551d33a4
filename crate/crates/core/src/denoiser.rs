//! Bayes-optimal discrete denoiser and its annealed (inverse-temperature) variant.
//!
//! For a virtual AWGN observation `y = x + w`, `w ~ CN(0, v)`, the posterior
//! over the constellation is a softmax of the log-posterior
//! `α_q = ln P[χ_q] − |y − χ_q|² / v`. The denoiser returns its mean and
//! variance. The annealed denoiser is the same map with `v` replaced by the
//! inverse temperature `1/β`.

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::{Error, Result};

/// Posterior mean and variance of one symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiseResult {
    pub mean: Complex64,
    pub var: f64,
}

/// Posterior summary used inside the detectors.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Posterior {
    pub mean: Complex64,
    pub var: f64,
    /// Index of the largest softmax weight, lowest index on ties.
    pub map_index: usize,
}

/// Softmax posterior at precision `prec = 1/v` (or `β`). `prec = 0` returns
/// the prior. No argument checking; callers guarantee finite `y` and
/// `prec >= 0`.
#[inline]
pub(crate) fn posterior(cons: &Constellation, y: Complex64, prec: f64) -> Posterior {
    let points = cons.points();
    let log_probs = cons.log_probs();
    let q = points.len();
    let mut alpha = [0.0f64; 64];
    let alpha = &mut alpha[..q];

    let mut best = 0;
    let mut max = f64::NEG_INFINITY;
    for (k, (p, lp)) in points.iter().zip(log_probs).enumerate() {
        let a = lp - (y - p).norm_sqr() * prec;
        alpha[k] = a;
        if a > max {
            max = a;
            best = k;
        }
    }

    let mut sum = 0.0;
    let mut mean = Complex64::new(0.0, 0.0);
    for (a, p) in alpha.iter_mut().zip(points) {
        // underflows to exactly 0 for far-away points, which gives the
        // hard-decision limit when v -> 0
        let w = (*a - max).exp();
        *a = w;
        sum += w;
        mean += p * w;
    }
    let inv = 1.0 / sum;
    mean *= inv;
    let mut var = 0.0;
    for (w, p) in alpha.iter().zip(points) {
        var += w * (p - mean).norm_sqr();
    }
    Posterior {
        mean,
        var: var * inv,
        map_index: best,
    }
}

/// Softmax weights `ζ(α_q)` for inspection and tests.
pub fn posterior_weights(cons: &Constellation, y: Complex64, v: f64) -> Result<Vec<f64>> {
    check_input(y, v, "noise variance")?;
    let alpha: Vec<f64> = cons
        .points()
        .iter()
        .zip(cons.log_probs())
        .map(|(p, lp)| lp - (y - p).norm_sqr() / v)
        .collect();
    let max = alpha.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = alpha.iter().map(|a| (a - max).exp()).collect();
    let s: f64 = w.iter().sum();
    Ok(w.into_iter().map(|x| x / s).collect())
}

fn check_input(y: Complex64, v: f64, name: &'static str) -> Result<()> {
    if !(y.re.is_finite() && y.im.is_finite()) {
        return Err(Error::invalid("denoiser input", format!("{y} is not finite")));
    }
    if v.is_nan() || v <= 0.0 {
        return Err(Error::invalid(name, format!("{v} is not positive")));
    }
    Ok(())
}

/// Posterior mean `η(y; v)` and variance `v·∂η/∂y` under the discrete prior.
pub fn bayes_denoise(cons: &Constellation, y: Complex64, v: f64) -> Result<DenoiseResult> {
    check_input(y, v, "noise variance")?;
    let p = posterior(cons, y, 1.0 / v);
    Ok(DenoiseResult {
        mean: p.mean,
        var: p.var,
    })
}

/// Annealed discrete denoiser `η_β(y; 1/β)`.
pub fn annealed_denoise(cons: &Constellation, y: Complex64, beta: f64) -> Result<DenoiseResult> {
    if !beta.is_finite() {
        return Err(Error::invalid("inverse temperature", format!("{beta} is not finite")));
    }
    check_input(y, beta, "inverse temperature")?;
    bayes_denoise(cons, y, 1.0 / beta)
}

/// Inverse-temperature schedule `β(t) = (d1 / c²)·(t/T)^d2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnealSchedule {
    pub d1: f64,
    pub d2: f64,
    pub iterations: usize,
    pub c_sq: f64,
}

impl AnnealSchedule {
    pub const DEFAULT_D1: f64 = 3.0;
    pub const DEFAULT_D2: f64 = 2.0;

    pub fn new(d1: f64, d2: f64, iterations: usize, c_sq: f64) -> Result<Self> {
        if !(d1 > 0.0 && d1.is_finite()) {
            return Err(Error::invalid("d1", format!("{d1} is not positive")));
        }
        if !(d2 > 0.0 && d2.is_finite()) {
            return Err(Error::invalid("d2", format!("{d2} is not positive")));
        }
        if iterations == 0 {
            return Err(Error::invalid("iterations", "must be at least 1"));
        }
        if !(c_sq > 0.0) {
            return Err(Error::invalid("c_sq", format!("{c_sq} is not positive")));
        }
        Ok(Self {
            d1,
            d2,
            iterations,
            c_sq,
        })
    }

    /// Default `(d1, d2) = (3, 2)` for the given constellation.
    pub fn for_constellation(cons: &Constellation, iterations: usize) -> Result<Self> {
        Self::new(Self::DEFAULT_D1, Self::DEFAULT_D2, iterations, cons.c_sq())
    }

    pub fn beta_at(&self, t: usize) -> Result<f64> {
        if t == 0 || t > self.iterations {
            return Err(Error::invalid(
                "iteration index",
                format!("{t} outside 1..={}", self.iterations),
            ));
        }
        Ok(self.beta_unchecked(t))
    }

    #[inline]
    pub(crate) fn beta_unchecked(&self, t: usize) -> f64 {
        self.d1 / self.c_sq * (t as f64 / self.iterations as f64).powf(self.d2)
    }
}

/// Free-function form of [`AnnealSchedule::beta_at`].
pub fn beta_at(sched: &AnnealSchedule, t: usize) -> Result<f64> {
    sched.beta_at(t)
}
