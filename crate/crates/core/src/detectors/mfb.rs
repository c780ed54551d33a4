//! Matched-filter bound: detection with perfect interference cancellation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Algorithm, DetectorRun, Problem};
use crate::constellation::Constellation;
use crate::denoiser::posterior;
use crate::{Error, Result};

/// Per-symbol decisions after cancelling all other symbols with their true
/// values and matched-filter combining over all N observations.
pub fn mfb_detect(
    y: &[Complex64],
    a: &DMatrix<Complex64>,
    n0: f64,
    cons: &Constellation,
    x_true: &[usize],
) -> Result<DetectorRun> {
    let p = Problem::new(y, a, n0, cons, Some(x_true))?;
    let (m, n) = (p.m, p.n);
    let x: Vec<Complex64> = x_true.iter().map(|&q| cons.points()[q]).collect();
    let residual: Vec<Complex64> = (0..n)
        .map(|i| p.y[i] - (0..m).map(|j| p.a[i * m + j] * x[j]).sum::<Complex64>())
        .collect();

    let mut hard = Vec::with_capacity(m);
    let mut means = Vec::with_capacity(m);
    let mut vars = Vec::with_capacity(m);
    for j in 0..m {
        let mut norm2 = 0.0;
        let mut z = Complex64::new(0.0, 0.0);
        for (i, r) in residual.iter().enumerate() {
            let a_ij = p.a[i * m + j];
            // ỹ = y − Σ_{l≠j} a_l x_l
            let yt = *r + a_ij * x[j];
            norm2 += p.abs2[i * m + j];
            z += a_ij.conj() * yt;
        }
        if !(norm2 > 0.0) {
            return Err(Error::invalid("measurement matrix", format!("column {j} has zero norm")));
        }
        let q = posterior(cons, z / norm2, norm2 / n0);
        hard.push(q.map_index);
        means.push(q.mean);
        vars.push(q.var);
    }
    Ok(DetectorRun::new(Algorithm::Mfb, cons, hard, means, vars, Vec::new()))
}

/// Bit errors of the matched-filter bound detector for one trial.
pub fn run_mfb(
    y: &[Complex64],
    a: &DMatrix<Complex64>,
    n0: f64,
    cons: &Constellation,
    x_true: &[usize],
) -> Result<usize> {
    Ok(mfb_detect(y, a, n0, cons, x_true)?.bit_errors(cons, x_true))
}
