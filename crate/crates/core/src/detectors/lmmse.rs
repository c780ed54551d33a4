//! LMMSE filtering and the LMMSE-based EP baseline.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{Algorithm, Damping, DetectorConfig, DetectorRun, Problem, Recorder};
use crate::constellation::Constellation;
use crate::denoiser::posterior;
use crate::{Error, Result};

/// Lower bound on the denoiser variance fed back into the EP update,
/// relative to `Es`.
const EP_VAR_FLOOR: f64 = 5e-7;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn not_pd() -> Error {
    Error::NotPositiveDefinite(f64::NAN)
}

/// Gaussian posterior of `x` under `y = A x + w` with an independent
/// Gaussian prior on each `x_m` given in natural parameters
/// (precision `lam`, precision-times-mean `gam`). Returns the diagonal of
/// the posterior covariance and the posterior mean. Solves an M×M or N×N
/// system, whichever is smaller.
pub(crate) struct GaussianPosterior<'a> {
    a: &'a DMatrix<Complex64>,
    y: DVector<Complex64>,
    n0: f64,
    gram: Option<DMatrix<Complex64>>,
    mf: DVector<Complex64>,
}

impl<'a> GaussianPosterior<'a> {
    pub(crate) fn new(a: &'a DMatrix<Complex64>, y: &[Complex64], n0: f64) -> Self {
        let (n, m) = a.shape();
        let y = DVector::from_column_slice(y);
        let gram = (m <= n).then(|| a.adjoint() * a);
        let mf = a.adjoint() * &y;
        Self { a, y, n0, gram, mf }
    }

    pub(crate) fn solve(&self, lam: &[f64], gam: &[Complex64]) -> Result<(Vec<f64>, Vec<Complex64>)> {
        let m = lam.len();
        let b = DVector::from_fn(m, |j, _| self.mf[j] / self.n0 + gam[j]);
        match &self.gram {
            Some(gram) => {
                let mut p = gram / real(self.n0);
                for j in 0..m {
                    p[(j, j)] += lam[j];
                }
                let chol = p.cholesky().ok_or_else(not_pd)?;
                let sigma = chol.inverse();
                let mu = &sigma * b;
                Ok(((0..m).map(|j| sigma[(j, j)].re).collect(), mu.iter().copied().collect()))
            }
            None => {
                // Woodbury: Σ = D − D Aᴴ (N0 I + A D Aᴴ)⁻¹ A D with D = diag(1/λ)
                let n = self.a.nrows();
                let d: Vec<f64> = lam.iter().map(|l| 1.0 / l).collect();
                let mut ad = self.a.clone();
                for (j, mut col) in ad.column_iter_mut().enumerate() {
                    col *= real(d[j]);
                }
                let mut k = &ad * self.a.adjoint();
                for i in 0..n {
                    k[(i, i)] += self.n0;
                }
                let chol = k.cholesky().ok_or_else(not_pd)?;
                let kinv_ad = chol.solve(&ad);
                let db = DVector::from_fn(m, |j, _| b[j] * d[j]);
                let corr = ad.adjoint() * chol.solve(&(&ad * &b));
                let mu: Vec<Complex64> = (0..m).map(|j| db[j] - corr[j]).collect();
                let diag: Vec<f64> = (0..m)
                    .map(|j| d[j] - (ad.column(j).adjoint() * kinv_ad.column(j))[(0, 0)].re)
                    .collect();
                Ok((diag, mu))
            }
        }
    }

    pub(crate) fn observation(&self) -> &DVector<Complex64> {
        &self.y
    }
}

/// `x̂ = Es·Aᴴ(Es·AAᴴ + N0·I)⁻¹y`, then nearest-point decisions.
pub fn run_lmmse(
    y: &[Complex64],
    a: &DMatrix<Complex64>,
    n0: f64,
    cons: &Constellation,
) -> Result<DetectorRun> {
    let p = Problem::new(y, a, n0, cons, None)?;
    let gp = GaussianPosterior::new(a, y, n0);
    let lam = vec![1.0 / p.es; p.m];
    let gam = vec![Complex64::new(0.0, 0.0); p.m];
    let (diag, mu) = gp.solve(&lam, &gam)?;
    debug_assert_eq!(gp.observation().len(), p.n);
    let hard = mu.iter().map(|&z| cons.demap_hard(z).0).collect();
    Ok(DetectorRun::new(Algorithm::Lmmse, cons, hard, mu, diag, Vec::new()))
}

/// Diagonal EP around an LMMSE filter: per iteration, the Gaussian
/// posterior is computed with the current per-symbol site approximations,
/// the site is removed to get the extrinsic (cavity) belief, the discrete
/// prior is applied with the Bayes denoiser, and the site is refitted by
/// Gaussian division with damping on the natural parameters.
pub fn run_lmmse_ep(
    y: &[Complex64],
    a: &DMatrix<Complex64>,
    n0: f64,
    cons: &Constellation,
    cfg: &DetectorConfig,
    x_true: Option<&[usize]>,
) -> Result<DetectorRun> {
    if cfg.iterations == 0 {
        return Err(Error::invalid("iterations", "must be at least 1"));
    }
    let p = Problem::new(y, a, n0, cons, x_true)?;
    let damping = Damping::new(cfg.damping, true)?;
    let m = p.m;
    let gp = GaussianPosterior::new(a, y, n0);

    let mut lam = vec![1.0 / p.es; m];
    let mut gam = vec![Complex64::new(0.0, 0.0); m];
    let mut post = Vec::new();
    let mut rec = Recorder::new(cfg.trace, cons, x_true);
    let mut ext_mean = vec![Complex64::new(0.0, 0.0); m];
    let mut ext_var = vec![0.0; m];

    for t in 1..=cfg.iterations {
        let (sigma, mu) = gp.solve(&lam, &gam)?;
        post.clear();
        for j in 0..m {
            let cav_prec = (1.0 / sigma[j] - lam[j]).max(1e-12 / sigma[j]);
            let tm = (mu[j] / sigma[j] - gam[j]) / cav_prec;
            ext_mean[j] = tm;
            ext_var[j] = 1.0 / cav_prec;
            let q = posterior(cons, tm, cav_prec);
            post.push(q);

            let vhat = q.var.max(EP_VAR_FLOOR * p.es);
            let new_lam = 1.0 / vhat - cav_prec;
            let new_gam = q.mean / vhat - tm * cav_prec;
            if new_lam > 0.0 {
                // damping in the natural-parameter domain; the site mean
                // parameter is complex, its precision real
                let (g, l) = damping.mix(new_gam, new_lam, gam[j], lam[j]);
                gam[j] = g;
                lam[j] = l;
            }
        }
        if rec.active() {
            rec.push(t, post.iter().map(|q| q.map_index), &ext_mean, &ext_var, &[]);
        }
    }

    Ok(DetectorRun::new(
        Algorithm::LmmseEp,
        cons,
        post.iter().map(|q| q.map_index).collect(),
        post.iter().map(|q| q.mean).collect(),
        post.iter().map(|q| q.var).collect(),
        rec.records,
    ))
}
