//! Matched-filter expectation propagation.
//!
//! Same interference cancellation as GaBP, but every symbol combines all N
//! observations, is denoised once, and the own-edge likelihood is divided
//! out of the moment-matched Gaussian afterwards.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::gabp::{mf_output, EdgeState};
use super::{Damping, DetectorConfig, DetectorRun, Divergence, Problem, Recorder, Temperature, ZERO};
use crate::constellation::Constellation;
use crate::denoiser::Posterior;
use crate::Result;

/// Gaussian division `N(x̂, v̂) / CN-likelihood of edge (n,m)`.
///
/// Returns `None` when the cavity precision is not positive; the caller then
/// keeps the edge's previous replica.
#[inline]
pub(crate) fn cavity(
    xhat: Complex64,
    vhat: f64,
    a: Complex64,
    abs2: f64,
    y_tilde: Complex64,
    psi: f64,
) -> Option<(Complex64, f64)> {
    if vhat <= 0.0 {
        // point-mass posterior: the division leaves it unchanged
        return Some((xhat, 0.0));
    }
    let lam = 1.0 / vhat - abs2 / psi;
    if !(lam > 0.0) || !lam.is_finite() {
        return None;
    }
    let v = 1.0 / lam;
    Some((v * (xhat / vhat - a.conj() * y_tilde / psi), v))
}

pub fn run_mfep(
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
    let mut prec_tot = vec![0.0; m];
    let mut mf_tot = vec![ZERO; m];
    let mut xbar = vec![ZERO; m];
    let mut vbar = vec![0.0; m];
    let mut post: Vec<Posterior> = Vec::new();
    let mut rec = Recorder::new(cfg.trace, cons, x_true);

    for t in 1..=big_t {
        st.cancel(&p);
        st.column_totals(&p, &mut prec_tot, &mut mf_tot);
        for j in 0..m {
            let (xb, vb) = mf_output(prec_tot[j], mf_tot[j]);
            if p.diverging(xb) {
                return Ok(DetectorRun::diverged(
                    cfg.algorithm,
                    cons,
                    m,
                    rec.records,
                    Divergence {
                        iteration: t,
                        reason: format!("belief magnitude {:e}", xb.norm()),
                    },
                ));
            }
            (xbar[j], vbar[j]) = if t > 1 {
                damping.mix(xb, vb, xbar[j], vbar[j])
            } else {
                (xb, vb)
            };
        }
        post = super::denoise_all(cons, &temp, t, &xbar, &vbar);
        if rec.active() {
            rec.push(t, post.iter().map(|q| q.map_index), &xbar, &vbar, &st.effective_noise);
        }
        if t == big_t {
            break;
        }

        for i in 0..n {
            for j in 0..m {
                let k = i * m + j;
                let q = &post[j];
                if let Some((x, v)) = cavity(q.mean, q.var, p.a[k], p.abs2[k], st.y_tilde[k], st.psi[k]) {
                    st.x_check[k] = x;
                    st.v_check[k] = v;
                }
            }
        }
    }

    Ok(DetectorRun::new(
        cfg.algorithm,
        cons,
        post.iter().map(|q| q.map_index).collect(),
        post.iter().map(|q| q.mean).collect(),
        post.iter().map(|q| q.var).collect(),
        rec.records,
    ))
}
