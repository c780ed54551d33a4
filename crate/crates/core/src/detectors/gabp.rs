//! Gaussian belief propagation with extrinsic belief combining.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{
    plain_precision, Damping, DetectorConfig, DetectorRun, Divergence, FinalDenoiser, Problem,
    Recorder, Temperature, ZERO,
};
use crate::constellation::Constellation;
use crate::denoiser::posterior;
use crate::Result;

/// Per-edge replicas and interference-cancelled observations, shared by
/// GaBP and MF-EP. All arrays are `N×M`, row-major.
pub(crate) struct EdgeState {
    /// soft replica x̌_{n,m}
    pub x_check: Vec<Complex64>,
    /// replica variance v̌_{n,m}
    pub v_check: Vec<f64>,
    /// ỹ_{n,m}
    pub y_tilde: Vec<Complex64>,
    /// ψ_{n,m}
    pub psi: Vec<f64>,
    /// e_n = y_n − Σ_m a_{n,m} x̌_{n,m}
    pub effective_noise: Vec<Complex64>,
}

impl EdgeState {
    pub(crate) fn new(p: &Problem<'_>) -> Self {
        let k = p.n * p.m;
        Self {
            x_check: vec![ZERO; k],
            v_check: vec![p.es; k],
            y_tilde: vec![ZERO; k],
            psi: vec![0.0; k],
            effective_noise: vec![ZERO; p.n],
        }
    }

    /// Soft interference cancellation: ỹ and ψ for every edge.
    pub(crate) fn cancel(&mut self, p: &Problem<'_>) {
        let m = p.m;
        for i in 0..p.n {
            let r = i * m..(i + 1) * m;
            let (a, abs2) = (&p.a[r.clone()], &p.abs2[r.clone()]);
            let (xc, vc) = (&self.x_check[r.clone()], &self.v_check[r.clone()]);
            let mut sx = ZERO;
            let mut sv = 0.0;
            for j in 0..m {
                sx += a[j] * xc[j];
                sv += abs2[j] * vc[j];
            }
            let e = p.y[i] - sx;
            self.effective_noise[i] = e;
            let yt = &mut self.y_tilde[r.clone()];
            let psi = &mut self.psi[r];
            for j in 0..m {
                yt[j] = e + a[j] * xc[j];
                // the own term is subtracted from the row total; clamp the rounding residue
                psi[j] = p.n0 + (sv - abs2[j] * vc[j]).max(0.0);
            }
        }
    }

    /// Column totals `Σ_n |a|²/ψ` and `Σ_n a*·ỹ/ψ` over all observations.
    pub(crate) fn column_totals(&self, p: &Problem<'_>, prec: &mut [f64], mf: &mut [Complex64]) {
        prec.fill(0.0);
        mf.fill(ZERO);
        let m = p.m;
        for i in 0..p.n {
            for j in 0..m {
                let k = i * m + j;
                let w = 1.0 / self.psi[k];
                prec[j] += p.abs2[k] * w;
                mf[j] += p.a[k].conj() * self.y_tilde[k] * w;
            }
        }
    }
}

/// Matched-filter output from a precision and a precision-weighted sum.
/// Zero precision (no observations) gives the uninformative belief.
#[inline]
pub(crate) fn mf_output(prec: f64, mf: Complex64) -> (Complex64, f64) {
    if prec > 0.0 {
        (mf / prec, 1.0 / prec)
    } else {
        (ZERO, f64::INFINITY)
    }
}

pub fn run_gabp(
    y: &[Complex64],
    a: &DMatrix<Complex64>,
    n0: f64,
    cons: &Constellation,
    cfg: &DetectorConfig,
    x_true: Option<&[usize]>,
) -> Result<DetectorRun> {
    cfg.validate()?;
    let p = Problem::new(y, a, n0, cons, x_true)?;
    let temp = Temperature::new(cfg, cons)?;
    let damping = Damping::new(cfg.damping, cfg.damp_variance)?;
    let (m, n, big_t) = (p.m, p.n, cfg.iterations);

    let mut st = EdgeState::new(&p);
    let mut prev_x = vec![ZERO; n * m];
    let mut prev_v = vec![0.0; n * m];
    let mut prec_tot = vec![0.0; m];
    let mut mf_tot = vec![ZERO; m];
    let mut xbar = vec![ZERO; m];
    let mut vbar = vec![0.0; m];
    let mut rec = Recorder::new(cfg.trace, cons, x_true);

    for t in 1..=big_t {
        st.cancel(&p);
        st.column_totals(&p, &mut prec_tot, &mut mf_tot);

        // consensus over all N observations
        for j in 0..m {
            (xbar[j], vbar[j]) = mf_output(prec_tot[j], mf_tot[j]);
            if p.diverging(xbar[j]) {
                return Ok(diverged(cfg, cons, m, rec, t, xbar[j]));
            }
        }
        if rec.active() {
            let hard = xbar
                .iter()
                .zip(&vbar)
                .map(|(&x, &v)| posterior(cons, x, temp.precision(t, v)).map_index);
            rec.push(t, hard, &xbar, &vbar, &st.effective_noise);
        }
        if t == big_t {
            // the last in-loop replicas are never read
            break;
        }

        // extrinsic combining: drop the edge's own observation from the column totals
        for i in 0..n {
            for j in 0..m {
                let k = i * m + j;
                let w = 1.0 / st.psi[k];
                let prec = prec_tot[j] - p.abs2[k] * w;
                let mf = mf_tot[j] - p.a[k].conj() * st.y_tilde[k] * w;
                let (mut xb, mut vb) = mf_output(prec, mf);
                if p.diverging(xb) {
                    return Ok(diverged(cfg, cons, m, rec, t, xb));
                }
                if t > 1 {
                    (xb, vb) = damping.mix(xb, vb, prev_x[k], prev_v[k]);
                }
                prev_x[k] = xb;
                prev_v[k] = vb;
                let post = posterior(cons, xb, temp.precision(t, vb));
                st.x_check[k] = post.mean;
                st.v_check[k] = post.var;
            }
        }
    }

    let final_prec = |v: f64| match (temp, cfg.gabp_final) {
        (Temperature::Annealed(s), FinalDenoiser::Annealed) => s.beta_unchecked(big_t),
        _ => plain_precision(v),
    };
    let post: Vec<_> = xbar
        .iter()
        .zip(&vbar)
        .map(|(&x, &v)| posterior(cons, x, final_prec(v)))
        .collect();
    Ok(DetectorRun::new(
        cfg.algorithm,
        cons,
        post.iter().map(|q| q.map_index).collect(),
        post.iter().map(|q| q.mean).collect(),
        post.iter().map(|q| q.var).collect(),
        rec.records,
    ))
}

fn diverged(
    cfg: &DetectorConfig,
    cons: &Constellation,
    m: usize,
    rec: Recorder<'_>,
    t: usize,
    x: Complex64,
) -> DetectorRun {
    DetectorRun::diverged(
        cfg.algorithm,
        cons,
        m,
        rec.records,
        Divergence {
            iteration: t,
            reason: format!("belief magnitude {:e}", x.norm()),
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{make_observation, sample_channel};
    use crate::denoiser::bayes_denoise;
    use crate::detectors::{Algorithm, TraceLevel};
    use crate::rng::trial_rng;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn first_iteration_psi_uses_prior_variance() {
        let cons = Constellation::qam(4, 1.0).unwrap();
        let mut rng = trial_rng(1, 0);
        let chan = sample_channel(5, 7, 0.6, &mut rng).unwrap();
        let obs = make_observation(&chan.a, &cons, 4.0, &mut rng);
        let p = Problem::new(&obs.y, &chan.a, obs.n0, &cons, None).unwrap();
        let mut st = EdgeState::new(&p);
        st.cancel(&p);
        for i in 0..7 {
            assert_eq!(st.effective_noise[i], obs.y[i]);
            for j in 0..5 {
                let expect: f64 = (0..5)
                    .filter(|&l| l != j)
                    .map(|l| chan.a[(i, l)].norm_sqr())
                    .sum::<f64>()
                    + obs.n0;
                assert_abs_diff_eq!(st.psi[i * 5 + j], expect, epsilon = 1e-12);
                assert!(st.psi[i * 5 + j] >= obs.n0);
            }
        }
    }

    #[test]
    fn single_edge_reduces_to_scalar_denoiser() {
        let cons = Constellation::qam(4, 1.0).unwrap();
        let a = DMatrix::from_element(1, 1, c(0.8, -0.3));
        let y = [c(0.5, 0.9)];
        let n0 = 0.2;
        let cfg = DetectorConfig::new(Algorithm::Gabp).iterations(1);
        let run = run_gabp(&y, &a, n0, &cons, &cfg, None).unwrap();
        let a11 = a[(0, 0)];
        let expect = bayes_denoise(&cons, y[0] / a11, n0 / a11.norm_sqr()).unwrap();
        assert_abs_diff_eq!((run.soft_means[0] - expect.mean).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(run.soft_vars[0], expect.var, epsilon = 1e-14);
    }

    #[test]
    fn prior_dominates_at_very_low_snr() {
        let cons = Constellation::qam(4, 1.0).unwrap();
        let mut rng = trial_rng(8, 0);
        let chan = sample_channel(8, 8, 0.0, &mut rng).unwrap();
        let obs = make_observation(&chan.a, &cons, -40.0, &mut rng);
        let cfg = DetectorConfig::new(Algorithm::Gabp).iterations(1);
        let run = run_gabp(&obs.y, &chan.a, obs.n0, &cons, &cfg, None).unwrap();
        for (m, v) in run.soft_means.iter().zip(&run.soft_vars) {
            assert!(m.norm() < 0.05, "{m}");
            assert!((v - 1.0).abs() < 0.01);
        }
    }

    /// Perturbs y_n and checks which edge LE outputs move.
    #[test]
    fn extrinsic_output_ignores_own_observation() {
        let cons = Constellation::qam(4, 1.0).unwrap();
        let mut rng = trial_rng(12, 0);
        let chan = sample_channel(2, 2, 0.3, &mut rng).unwrap();
        let obs = make_observation(&chan.a, &cons, 10.0, &mut rng);

        let edge_outputs = |y: &[Complex64]| {
            let p = Problem::new(y, &chan.a, obs.n0, &cons, None).unwrap();
            let mut st = EdgeState::new(&p);
            // nonzero replicas so interference cancellation is exercised
            st.x_check = vec![c(0.3, -0.1), c(-0.2, 0.4), c(0.1, 0.1), c(-0.5, -0.3)];
            st.v_check = vec![0.4, 0.2, 0.6, 0.3];
            st.cancel(&p);
            let (mut prec, mut mf) = (vec![0.0; 2], vec![ZERO; 2]);
            st.column_totals(&p, &mut prec, &mut mf);
            let mut out = vec![ZERO; 4];
            for i in 0..2 {
                for j in 0..2 {
                    let k = i * 2 + j;
                    let w = 1.0 / st.psi[k];
                    let pr = prec[j] - p.abs2[k] * w;
                    let m = mf[j] - p.a[k].conj() * st.y_tilde[k] * w;
                    out[k] = mf_output(pr, m).0;
                }
            }
            out
        };
        let base = edge_outputs(&obs.y);
        let h = 1e-6;
        for n in 0..2 {
            let mut y2 = obs.y.clone();
            y2[n] += c(h, 0.0);
            let moved = edge_outputs(&y2);
            for i in 0..2 {
                for j in 0..2 {
                    let d = (moved[i * 2 + j] - base[i * 2 + j]).norm() / h;
                    if i == n {
                        assert!(d < 1e-6, "edge ({i},{j}) depends on its own y_{n}: {d}");
                    } else {
                        assert!(d > 1e-3, "edge ({i},{j}) ignores y_{n}");
                    }
                }
            }
        }
    }

    #[test]
    fn trace_length_and_determinism() {
        let cons = Constellation::qam(4, 1.0).unwrap();
        let mut rng = trial_rng(5, 0);
        let chan = sample_channel(6, 10, 0.5, &mut rng).unwrap();
        let obs = make_observation(&chan.a, &cons, 8.0, &mut rng);
        let cfg = DetectorConfig::new(Algorithm::Gabp)
            .iterations(12)
            .annealed(3.0, 2.0)
            .trace(TraceLevel::Full);
        let r1 = run_gabp(&obs.y, &chan.a, obs.n0, &cons, &cfg, Some(&obs.x_indices)).unwrap();
        let r2 = run_gabp(&obs.y, &chan.a, obs.n0, &cons, &cfg, Some(&obs.x_indices)).unwrap();
        assert_eq!(r1, r2);
        assert_eq!(r1.trace.len(), 12);
        assert_eq!(r1.trace[0].effective_noise, obs.y);
        assert_eq!(r1.trace.last().unwrap().bit_errors, Some(r1.bit_errors(&cons, &obs.x_indices)));
    }
}
