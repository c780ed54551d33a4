// Usage: cargo run --release --example correlated_channel
//
// Draws Kronecker-correlated Rayleigh channels and compares the empirical
// receive correlation (1/M)·E[AAᴴ] with the exponential model ρ^|i−j|.

use mpdetect::prelude::*;
use mpdetect::rng::trial_rng;
use nalgebra::DMatrix;

fn main() -> Result<()> {
    let (m, n, rho) = (16, 8, 0.8);
    let chan = KroneckerChannel::new(m, n, rho)?;
    let target = exp_correlation(CorrelationSpec { rho, n })?;

    let draws = 5_000;
    let mut acc = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..draws {
        let a = chan.sample(&mut trial_rng(7, k)).a;
        acc += &a * a.adjoint();
    }
    acc /= Complex64::new((draws as usize * m) as f64, 0.0);

    println!("lag  model     empirical (row-averaged real part)");
    for lag in 0..n {
        let emp: f64 = (0..n - lag).map(|i| acc[(i, i + lag)].re).sum::<f64>() / (n - lag) as f64;
        println!("{lag:>3}  {:.4}    {emp:.4}", target[(0, lag)]);
    }
    let err = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (acc[(i, j)] - target[(i, j)]).norm())
        .fold(0.0, f64::max);
    println!("max entrywise deviation over {draws} draws: {err:.4}");
    Ok(())
}
