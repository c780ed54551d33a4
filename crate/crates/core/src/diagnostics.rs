//! Belief-correlation diagnostics: effective-noise correlation matrices and
//! standardized-residual histograms of LE outputs.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::detectors::Algorithm;
use crate::{Error, Result};

/// Replicas needed to form the post-IC effective noise.
#[derive(Debug, Clone, Copy)]
pub enum ReplicaState<'a> {
    /// Per-edge replicas x̌_{n,m}, row-major `N×M` (GaBP, MF-EP).
    Edges { x_check: &'a [Complex64] },
    /// Per-symbol replicas with the Onsager quantities (GAMP).
    Symbols {
        x_check: &'a [Complex64],
        gamma: &'a [f64],
        s_prev: &'a [Complex64],
    },
}

/// `e_n = y_n − Σ_m a_{n,m} x̌_{n,m}` for edge-based algorithms and
/// `e_n = y_n − Σ_m a_{n,m} x̌_m + γ_n s_n` for GAMP.
pub fn effective_noise(
    algorithm: Algorithm,
    state: ReplicaState<'_>,
    y: &[Complex64],
    a: &DMatrix<Complex64>,
) -> Result<Vec<Complex64>> {
    let (n, m) = a.shape();
    check_len("observation vector", n, y.len())?;
    match (algorithm, state) {
        (Algorithm::Gabp | Algorithm::Mfep, ReplicaState::Edges { x_check }) => {
            check_len("edge replicas", n * m, x_check.len())?;
            Ok((0..n)
                .map(|i| y[i] - (0..m).map(|j| a[(i, j)] * x_check[i * m + j]).sum::<Complex64>())
                .collect())
        }
        (Algorithm::Gamp, ReplicaState::Symbols { x_check, gamma, s_prev }) => {
            check_len("symbol replicas", m, x_check.len())?;
            check_len("gamma", n, gamma.len())?;
            check_len("previous residual", n, s_prev.len())?;
            Ok((0..n)
                .map(|i| {
                    y[i] - (0..m).map(|j| a[(i, j)] * x_check[j]).sum::<Complex64>() + s_prev[i] * gamma[i]
                })
                .collect())
        }
        (alg, _) => Err(Error::invalid(
            "replica state",
            format!("state variant does not match algorithm {alg}"),
        )),
    }
}

fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

/// Streaming second moments of the effective noise across trials.
///
/// Accumulators form a monoid under [`CorrAccumulator::merge`], so
/// per-worker partial sums can be combined in any grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrAccumulator {
    n: usize,
    /// `cross[i*n + j] = Σ e_i* e_j`
    cross: Vec<Complex64>,
    power: Vec<f64>,
    trials: u64,
}

impl CorrAccumulator {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            cross: vec![Complex64::new(0.0, 0.0); n * n],
            power: vec![0.0; n],
            trials: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn accumulate(&mut self, e: &[Complex64]) -> Result<()> {
        check_len("effective noise", self.n, e.len())?;
        let n = self.n;
        for i in 0..n {
            let ci = e[i].conj();
            self.power[i] += e[i].norm_sqr();
            let row = &mut self.cross[i * n..(i + 1) * n];
            for (c, ej) in row.iter_mut().zip(e) {
                *c += ci * ej;
            }
        }
        self.trials += 1;
        Ok(())
    }

    pub fn merge(&mut self, other: &CorrAccumulator) -> Result<()> {
        check_len("accumulator dimension", self.n, other.n)?;
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            *a += b;
        }
        for (a, b) in self.power.iter_mut().zip(&other.power) {
            *a += b;
        }
        self.trials += other.trials;
        Ok(())
    }

    /// Normalized correlation `Γ_ij = E[e_i* e_j] / √(E|e_i|² E|e_j|²)`.
    pub fn finalize(&self) -> Result<DMatrix<Complex64>> {
        if self.trials == 0 {
            return Err(Error::EmptyAccumulator);
        }
        let n = self.n;
        Ok(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                self.cross[i * n + j] / (self.power[i] * self.power[j]).sqrt()
            }
        }))
    }
}

/// Mean of `|Γ_ij|` over `i ≠ j`.
pub fn mean_offdiag_abs(gamma: &DMatrix<Complex64>) -> f64 {
    let n = gamma.nrows();
    if n < 2 {
        return 0.0;
    }
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += gamma[(i, j)].norm();
            }
        }
    }
    s / (n * (n - 1)) as f64
}

/// Mean `|Γ_{i,i+k}|` along the k-th super-diagonal, for `k = 1..=max_k`.
pub fn band_profile(gamma: &DMatrix<Complex64>, max_k: usize) -> Vec<f64> {
    let n = gamma.nrows();
    (1..=max_k.min(n.saturating_sub(1)))
        .map(|k| (0..n - k).map(|i| gamma[(i, i + k)].norm()).sum::<f64>() / (n - k) as f64)
        .collect()
}

/// Standardized LE-output residuals `(x̄_m − x_m)/√(v̄_m/2)`, real and
/// imaginary parts pooled (each should be N(0,1) if the Gaussian belief
/// model holds).
pub fn standardized_residuals(xbar: &[Complex64], vbar: &[f64], x_true: &[Complex64]) -> Result<Vec<f64>> {
    check_len("belief variances", xbar.len(), vbar.len())?;
    check_len("true symbols", xbar.len(), x_true.len())?;
    let mut out = Vec::with_capacity(2 * xbar.len());
    for ((x, &v), t) in xbar.iter().zip(vbar).zip(x_true) {
        if !(v > 0.0) {
            return Err(Error::invalid("belief variance", format!("{v} is not positive")));
        }
        let s = (v / 2.0).sqrt();
        let d = x - t;
        out.push(d.re / s);
        out.push(d.im / s);
    }
    Ok(out)
}

/// Normalized histogram of standardized residuals with a standard-normal overlay.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefHistogram {
    pub bin_edges: Vec<f64>,
    pub density: Vec<f64>,
    /// Standard normal density at the bin centres.
    pub ideal_overlay: Vec<f64>,
    /// `(k, #|r| > k)` for k = 3, 4, 5.
    pub tail_counts: Vec<(u32, usize)>,
    pub total: usize,
}

pub const TAIL_SIGMAS: [u32; 3] = [3, 4, 5];

impl BeliefHistogram {
    /// Histogram on a symmetric range that covers every sample.
    pub fn from_residuals(residuals: &[f64], bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("bins", "must be at least 1"));
        }
        if residuals.is_empty() {
            return Err(Error::invalid("residuals", "no samples"));
        }
        if residuals.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid("residuals", "non-finite sample"));
        }
        let max = residuals.iter().map(|r| r.abs()).fold(0.0, f64::max);
        let half = if max > 0.0 { max * (1.0 + 1e-9) } else { 1.0 };
        let width = 2.0 * half / bins as f64;
        let bin_edges: Vec<f64> = (0..=bins).map(|k| -half + k as f64 * width).collect();
        let mut counts = vec![0usize; bins];
        for &r in residuals {
            let k = (((r + half) / width).floor() as usize).min(bins - 1);
            counts[k] += 1;
        }
        let total = residuals.len();
        let density = counts.iter().map(|&c| c as f64 / (total as f64 * width)).collect();
        let ideal_overlay = bin_edges
            .windows(2)
            .map(|w| {
                let x = 0.5 * (w[0] + w[1]);
                (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
            })
            .collect();
        let tail_counts = TAIL_SIGMAS
            .iter()
            .map(|&k| (k, residuals.iter().filter(|r| r.abs() > k as f64).count()))
            .collect();
        Ok(Self {
            bin_edges,
            density,
            ideal_overlay,
            tail_counts,
            total,
        })
    }

    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    /// Fraction of samples with `|r| > k`, for `k` in [`TAIL_SIGMAS`].
    pub fn tail_fraction(&self, k: u32) -> Option<f64> {
        self.tail_counts
            .iter()
            .find(|(kk, _)| *kk == k)
            .map(|&(_, c)| c as f64 / self.total as f64)
    }
}

pub fn belief_residual_histogram(
    xbar: &[Complex64],
    vbar: &[f64],
    x_true: &[Complex64],
    bins: usize,
) -> Result<BeliefHistogram> {
    BeliefHistogram::from_residuals(&standardized_residuals(xbar, vbar, x_true)?, bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{complex_normal, trial_rng};
    use approx::assert_abs_diff_eq;
    use rand_distr::{Distribution, StandardNormal};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn one_sample_correlation() {
        let mut acc = CorrAccumulator::new(2);
        acc.accumulate(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        let g = acc.finalize().unwrap();
        assert_eq!(g[(0, 1)], c(0.0, 1.0));
        assert_eq!(g[(1, 0)], c(0.0, -1.0));
        assert_eq!(g[(0, 0)], c(1.0, 0.0));
    }

    #[test]
    fn empty_and_mismatched() {
        let mut acc = CorrAccumulator::new(3);
        assert!(matches!(acc.finalize(), Err(Error::EmptyAccumulator)));
        assert!(acc.accumulate(&[c(1.0, 0.0)]).is_err());
        assert!(acc.merge(&CorrAccumulator::new(2)).is_err());
    }

    #[test]
    fn merge_equals_single_pass() {
        let mut rng = trial_rng(1, 0);
        let samples: Vec<Vec<Complex64>> = (0..50).map(|_| (0..4).map(|_| complex_normal(&mut rng, 1.0)).collect()).collect();
        let mut all = CorrAccumulator::new(4);
        let (mut a, mut b) = (CorrAccumulator::new(4), CorrAccumulator::new(4));
        for (k, e) in samples.iter().enumerate() {
            all.accumulate(e).unwrap();
            if k % 3 == 0 { a.accumulate(e).unwrap() } else { b.accumulate(e).unwrap() }
        }
        a.merge(&b).unwrap();
        let (ga, gb) = (all.finalize().unwrap(), a.finalize().unwrap());
        assert_eq!(a.trials(), 50);
        for (x, y) in ga.iter().zip(gb.iter()) {
            assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn white_noise_has_small_offdiagonal() {
        let mut rng = trial_rng(2, 0);
        let mut acc = CorrAccumulator::new(6);
        for _ in 0..100_000 {
            let e: Vec<Complex64> = (0..6).map(|_| complex_normal(&mut rng, 1.0)).collect();
            acc.accumulate(&e).unwrap();
        }
        let g = acc.finalize().unwrap();
        for i in 0..6 {
            for j in 0..6 {
                if i != j {
                    assert!(g[(i, j)].norm() < 0.02);
                }
                assert!((g[(i, j)] - g[(j, i)].conj()).norm() < 1e-12);
            }
        }
        assert!(mean_offdiag_abs(&g) < 0.02);
    }

    #[test]
    fn band_profile_of_known_matrix() {
        let g = DMatrix::from_fn(4, 4, |i, j| c(0.5f64.powi(i.abs_diff(j) as i32), 0.0));
        let b = band_profile(&g, 3);
        assert_abs_diff_eq!(b[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(b[2], 0.125, epsilon = 1e-15);
    }

    #[test]
    fn exact_beliefs_fill_zero_bin() {
        let x = vec![c(0.7, -0.7), c(-0.7, 0.7)];
        let h = belief_residual_histogram(&x, &[0.1, 0.2], &x, 11).unwrap();
        let zero_bin = h.bin_edges.windows(2).position(|w| w[0] <= 0.0 && 0.0 < w[1]).unwrap();
        assert_abs_diff_eq!(h.density[zero_bin] * h.bin_width(), 1.0, epsilon = 1e-12);
        assert_eq!(h.tail_fraction(3), Some(0.0));
    }

    #[test]
    fn rejects_nonpositive_variance() {
        let x = vec![c(0.0, 0.0)];
        assert!(belief_residual_histogram(&x, &[0.0], &x, 5).is_err());
    }

    #[test]
    fn normal_tail_fraction() {
        let mut rng = trial_rng(3, 0);
        let r: Vec<f64> = (0..1_000_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let h = BeliefHistogram::from_residuals(&r, 200).unwrap();
        let f3 = h.tail_fraction(3).unwrap();
        assert!((0.002..=0.0035).contains(&f3), "{f3}");
        let mass: f64 = h.density.iter().map(|d| d * h.bin_width()).sum();
        assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn effective_noise_branches() {
        let a = DMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.5, 0.0), c(0.0, 1.0), c(1.0, 0.0)]);
        let y = [c(1.0, 1.0), c(-1.0, 0.5)];
        let zeros = [c(0.0, 0.0); 4];
        let e = effective_noise(Algorithm::Gabp, ReplicaState::Edges { x_check: &zeros }, &y, &a).unwrap();
        assert_eq!(e, y.to_vec());
        let e = effective_noise(
            Algorithm::Gamp,
            ReplicaState::Symbols { x_check: &zeros[..2], gamma: &[1.0, 2.0], s_prev: &zeros[..2] },
            &y,
            &a,
        )
        .unwrap();
        assert_eq!(e, y.to_vec());
        assert!(effective_noise(Algorithm::Gamp, ReplicaState::Edges { x_check: &zeros }, &y, &a).is_err());
        assert!(effective_noise(Algorithm::Lmmse, ReplicaState::Edges { x_check: &zeros }, &y, &a).is_err());
    }
}
