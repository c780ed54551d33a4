//! Generalized approximate message passing with the Onsager correction.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Damping, DetectorConfig, DetectorRun, Divergence, Problem, Recorder, Temperature, ZERO};
use crate::constellation::Constellation;
use crate::denoiser::posterior;
use crate::Result;

/// O(M + N) state of GAMP.
pub(crate) struct GampState {
    pub x_check: Vec<Complex64>,
    pub v_check: Vec<f64>,
    /// scaled residual s_n, zero before the first iteration
    pub s: Vec<Complex64>,
    pub p: Vec<Complex64>,
    pub gamma: Vec<f64>,
    pub psi: Vec<f64>,
    pub effective_noise: Vec<Complex64>,
}

impl GampState {
    pub(crate) fn new(pr: &Problem<'_>) -> Self {
        Self {
            x_check: vec![ZERO; pr.m],
            v_check: vec![pr.es; pr.m],
            s: vec![ZERO; pr.n],
            p: vec![ZERO; pr.n],
            gamma: vec![0.0; pr.n],
            psi: vec![0.0; pr.n],
            effective_noise: vec![ZERO; pr.n],
        }
    }

    /// Output step: γ_n, p_n (with the Onsager term), ψ_n and s_n.
    pub(crate) fn output_step(&mut self, pr: &Problem<'_>) {
        let m = pr.m;
        for i in 0..pr.n {
            let r = i * m..(i + 1) * m;
            let (a, abs2) = (&pr.a[r.clone()], &pr.abs2[r]);
            let mut z = ZERO;
            let mut g = 0.0;
            for j in 0..m {
                z += a[j] * self.x_check[j];
                g += abs2[j] * self.v_check[j];
            }
            let p = z - self.s[i] * g;
            let psi = g + pr.n0;
            let e = pr.y[i] - p;
            self.gamma[i] = g;
            self.p[i] = p;
            self.psi[i] = psi;
            self.effective_noise[i] = e;
            self.s[i] = e / psi;
        }
    }

    /// Input step: per-symbol LE output (x̄_m, v̄_m) into the given buffers.
    pub(crate) fn input_step(&self, pr: &Problem<'_>, xbar: &mut [Complex64], vbar: &mut [f64]) {
        let m = pr.m;
        let mut prec = vec![0.0; m];
        let mut corr = vec![ZERO; m];
        for i in 0..pr.n {
            let w = 1.0 / self.psi[i];
            let s = self.s[i];
            for j in 0..m {
                let k = i * m + j;
                prec[j] += pr.abs2[k] * w;
                corr[j] += pr.a[k].conj() * s;
            }
        }
        for j in 0..m {
            let v = 1.0 / prec[j];
            vbar[j] = v;
            xbar[j] = self.x_check[j] + corr[j] * v;
        }
    }
}

pub fn run_gamp(
    y: &[Complex64],
    a: &DMatrix<Complex64>,
    n0: f64,
    cons: &Constellation,
    cfg: &DetectorConfig,
    x_true: Option<&[usize]>,
) -> Result<DetectorRun> {
    cfg.validate()?;
    let pr = Problem::new(y, a, n0, cons, x_true)?;
    let temp = Temperature::new(cfg, cons)?;
    let damping = Damping::new(cfg.damping, cfg.damp_variance)?;
    let m = pr.m;

    let mut st = GampState::new(&pr);
    let mut xb = vec![ZERO; m];
    let mut vb = vec![0.0; m];
    let mut xbar = vec![ZERO; m];
    let mut vbar = vec![0.0; m];
    let mut post = Vec::new();
    let mut rec = Recorder::new(cfg.trace, cons, x_true);

    for t in 1..=cfg.iterations {
        st.output_step(&pr);
        st.input_step(&pr, &mut xb, &mut vb);
        for j in 0..m {
            if pr.diverging(xb[j]) || vb[j].is_nan() {
                return Ok(DetectorRun::diverged(
                    cfg.algorithm,
                    cons,
                    m,
                    rec.records,
                    Divergence {
                        iteration: t,
                        reason: format!("belief magnitude {:e}", xb[j].norm()),
                    },
                ));
            }
            (xbar[j], vbar[j]) = if t > 1 {
                damping.mix(xb[j], vb[j], xbar[j], vbar[j])
            } else {
                (xb[j], vb[j])
            };
        }
        post = xbar
            .iter()
            .zip(&vbar)
            .map(|(&x, &v)| posterior(cons, x, temp.precision(t, v)))
            .collect::<Vec<_>>();
        for (j, q) in post.iter().enumerate() {
            st.x_check[j] = q.mean;
            st.v_check[j] = q.var;
        }
        if rec.active() {
            rec.push(t, post.iter().map(|q| q.map_index), &xbar, &vbar, &st.effective_noise);
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
