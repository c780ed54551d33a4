//! Kronecker-correlated Rayleigh channels, symbols and AWGN.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::constellation::Constellation;
use crate::rng::complex_normal;
use crate::{Error, Result};

/// Exponential receive-correlation model `[R]_ij = ρ^|i−j|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationSpec {
    pub rho: f64,
    pub n: usize,
}

fn check_rho(rho: f64) -> Result<()> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::invalid("rho", format!("{rho} outside [0, 1)")));
    }
    Ok(())
}

pub fn exp_correlation(spec: CorrelationSpec) -> Result<DMatrix<f64>> {
    check_rho(spec.rho)?;
    if spec.n == 0 {
        return Err(Error::invalid("correlation dimension", "must be at least 1"));
    }
    Ok(DMatrix::from_fn(spec.n, spec.n, |i, j| {
        if i == j {
            1.0
        } else {
            spec.rho.powi(i.abs_diff(j) as i32)
        }
    }))
}

/// Hermitian square root `B = U·diag(√λ)·Uᴴ` of a Hermitian positive-definite matrix.
pub fn matrix_sqrt(r: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let n = r.nrows();
    if r.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "matrix_sqrt (square input)",
            expected: n,
            found: r.ncols(),
        });
    }
    let scale = r.iter().map(|z| z.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let asym = (r - r.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if asym > 1e-12 * scale {
        return Err(Error::invalid("matrix_sqrt input", "matrix is not Hermitian"));
    }
    let eig = r.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.max();
    let lmin = eig.eigenvalues.min();
    if !(lmin > 1e-13 * lmax.abs().max(1.0)) {
        return Err(Error::NotPositiveDefinite(lmin));
    }
    let u = &eig.eigenvectors;
    let mut scaled = u.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= Complex64::new(eig.eigenvalues[j].sqrt(), 0.0);
    }
    Ok(scaled * u.adjoint())
}

/// One channel draw `A = R_RX^{1/2}·G` (transmit correlation is the identity).
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub a: DMatrix<Complex64>,
    pub rho: f64,
}

impl ChannelRealization {
    /// Number of unknowns `M`.
    pub fn m(&self) -> usize {
        self.a.ncols()
    }

    /// Number of observations `N`.
    pub fn n(&self) -> usize {
        self.a.nrows()
    }
}

/// Kronecker channel generator with the receive-side root precomputed.
#[derive(Debug, Clone)]
pub struct KroneckerChannel {
    m: usize,
    n: usize,
    rho: f64,
    root: Option<DMatrix<Complex64>>,
}

impl KroneckerChannel {
    pub fn new(m: usize, n: usize, rho: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::invalid("channel dimensions", format!("M={m}, N={n}")));
        }
        check_rho(rho)?;
        let root = if rho == 0.0 {
            None
        } else {
            let r = exp_correlation(CorrelationSpec { rho, n })?.map(|x| Complex64::new(x, 0.0));
            Some(matrix_sqrt(&r)?)
        };
        Ok(Self { m, n, rho, root })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Draws `G` with i.i.d. CN(0,1) entries (row by row) and returns `R^{1/2}·G`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelRealization {
        let mut g = DMatrix::<Complex64>::zeros(self.n, self.m);
        for i in 0..self.n {
            for j in 0..self.m {
                g[(i, j)] = complex_normal(rng, 1.0);
            }
        }
        let a = match &self.root {
            None => g,
            Some(root) => root * g,
        };
        ChannelRealization { a, rho: self.rho }
    }
}

pub fn sample_channel<R: Rng + ?Sized>(
    m: usize,
    n: usize,
    rho_rx: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    Ok(KroneckerChannel::new(m, n, rho_rx)?.sample(rng))
}

/// `N0 = Es·10^(−EsN0/10)`.
pub fn noise_power(es: f64, esn0_db: f64) -> f64 {
    es * 10f64.powf(-esn0_db / 10.0)
}

/// Noisy linear measurement `y = A·x + w`.
#[derive(Debug, Clone)]
pub struct Observation {
    pub y: Vec<Complex64>,
    pub x_true: Vec<Complex64>,
    pub x_indices: Vec<usize>,
    pub w: Vec<Complex64>,
    pub n0: f64,
}

impl Observation {
    /// Builds `y` from given symbol indices and noise.
    pub fn from_parts(
        a: &DMatrix<Complex64>,
        cons: &Constellation,
        x_indices: Vec<usize>,
        w: Vec<Complex64>,
        n0: f64,
    ) -> Result<Self> {
        if x_indices.len() != a.ncols() {
            return Err(Error::DimensionMismatch {
                context: "symbol vector",
                expected: a.ncols(),
                found: x_indices.len(),
            });
        }
        if w.len() != a.nrows() {
            return Err(Error::DimensionMismatch {
                context: "noise vector",
                expected: a.nrows(),
                found: w.len(),
            });
        }
        if let Some(&bad) = x_indices.iter().find(|&&q| q >= cons.order()) {
            return Err(Error::invalid("symbol index", format!("{bad} >= {}", cons.order())));
        }
        let x_true: Vec<Complex64> = x_indices.iter().map(|&q| cons.points()[q]).collect();
        let y = (0..a.nrows())
            .map(|i| {
                let mut acc = w[i];
                for (j, x) in x_true.iter().enumerate() {
                    acc += a[(i, j)] * x;
                }
                acc
            })
            .collect();
        Ok(Self {
            y,
            x_true,
            x_indices,
            w,
            n0,
        })
    }
}

/// Draws uniform symbols and unit-power noise (in that order), scales the
/// noise to `N0 = Es·10^(−EsN0/10)` and forms `y = A·x + w`.
pub fn make_observation<R: Rng + ?Sized>(
    a: &DMatrix<Complex64>,
    cons: &Constellation,
    esn0_db: f64,
    rng: &mut R,
) -> Observation {
    let x_indices: Vec<usize> = (0..a.ncols()).map(|_| rng.random_range(0..cons.order())).collect();
    let n0 = noise_power(cons.symbol_energy(), esn0_db);
    let scale = n0.sqrt();
    let w: Vec<Complex64> = (0..a.nrows()).map(|_| complex_normal(rng, 1.0) * scale).collect();
    Observation::from_parts(a, cons, x_indices, w, n0).expect("dimensions are consistent by construction")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::trial_rng;
    use approx::assert_abs_diff_eq;

    fn to_complex(r: &DMatrix<f64>) -> DMatrix<Complex64> {
        r.map(|x| Complex64::new(x, 0.0))
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn exp_correlation_entries() {
        let r = exp_correlation(CorrelationSpec { rho: 0.0, n: 5 }).unwrap();
        assert_eq!(r, DMatrix::identity(5, 5));
        let r = exp_correlation(CorrelationSpec { rho: 0.8, n: 6 }).unwrap();
        assert_abs_diff_eq!(r[(1, 3)], 0.64, epsilon = 1e-15);
        assert_abs_diff_eq!(r[(5, 0)], 0.8f64.powi(5), epsilon = 1e-15);
        assert!(exp_correlation(CorrelationSpec { rho: 1.0, n: 3 }).is_err());
        assert!(exp_correlation(CorrelationSpec { rho: -0.1, n: 3 }).is_err());
    }

    #[test]
    fn exp_correlation_is_positive_definite() {
        for &rho in &[0.1, 0.5, 0.9, 0.99] {
            for n in [2, 16, 64] {
                let r = exp_correlation(CorrelationSpec { rho, n }).unwrap();
                let eig = r.symmetric_eigen();
                assert!(eig.eigenvalues.min() > 0.0, "rho={rho} n={n}");
            }
        }
    }

    #[test]
    fn sqrt_of_identity_and_diagonal() {
        let i = DMatrix::<Complex64>::identity(4, 4);
        assert!(max_abs(&(matrix_sqrt(&i).unwrap() - &i)) < 1e-14);
        let d = to_complex(&DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![4.0, 1.0])));
        let b = matrix_sqrt(&d).unwrap();
        assert_abs_diff_eq!(b[(0, 0)].re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b[(1, 1)].re, 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(b[(0, 1)].norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn sqrt_reconstructs_random_pd() {
        let mut rng = trial_rng(3, 0);
        let g = DMatrix::from_fn(8, 8, |_, _| complex_normal(&mut rng, 1.0));
        let r = &g * g.adjoint() + DMatrix::<Complex64>::identity(8, 8) * Complex64::new(0.1, 0.0);
        let b = matrix_sqrt(&r).unwrap();
        assert!(max_abs(&(&b * b.adjoint() - &r)) <= 1e-10);
    }

    #[test]
    fn sqrt_rejects_non_pd() {
        let r = to_complex(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]));
        assert!(matches!(matrix_sqrt(&r), Err(Error::NotPositiveDefinite(_))));
    }

    #[test]
    fn uncorrelated_entries_are_unit_circular() {
        let mut rng = trial_rng(9, 0);
        let model = KroneckerChannel::new(10, 10, 0.0).unwrap();
        let (mut p, mut pv, mut cnt) = (0.0, Complex64::new(0.0, 0.0), 0usize);
        for _ in 0..1000 {
            let a = model.sample(&mut rng).a;
            for z in a.iter() {
                p += z.norm_sqr();
                pv += z * z;
                cnt += 1;
            }
        }
        assert!((p / cnt as f64 - 1.0).abs() < 0.02);
        assert!((pv / cnt as f64).norm() < 0.02);
    }

    #[test]
    fn correlated_second_moment_matches_r() {
        let (m, n, rho) = (4, 6, 0.8);
        let model = KroneckerChannel::new(m, n, rho).unwrap();
        let r = exp_correlation(CorrelationSpec { rho, n }).unwrap();
        let mut rng = trial_rng(21, 0);
        let mut acc = DMatrix::<Complex64>::zeros(n, n);
        let draws = 10_000;
        for _ in 0..draws {
            let a = model.sample(&mut rng).a;
            acc += &a * a.adjoint();
        }
        acc /= Complex64::new((m * draws) as f64, 0.0);
        for i in 0..n {
            for j in 0..n {
                assert!((acc[(i, j)] - r[(i, j)]).norm() < 0.02, "({i},{j})");
            }
        }
    }

    #[test]
    fn rows_statistically_alike_when_uncorrelated() {
        let model = KroneckerChannel::new(8, 4, 0.0).unwrap();
        let mut rng = trial_rng(2, 0);
        let mut power = [0.0; 4];
        let mut mean = [Complex64::new(0.0, 0.0); 4];
        let draws = 5000;
        for _ in 0..draws {
            let a = model.sample(&mut rng).a;
            for i in 0..4 {
                for j in 0..8 {
                    power[i] += a[(i, j)].norm_sqr();
                    mean[i] += a[(i, j)];
                }
            }
        }
        let k = (draws * 8) as f64;
        for i in 0..4 {
            assert!((power[i] / k - 1.0).abs() < 0.03);
            assert!((mean[i] / k).norm() < 0.02);
        }
    }

    #[test]
    fn observation_noise_power_and_noiseless_hook() {
        let cons = Constellation::qam(4, 1.0).unwrap();
        assert_abs_diff_eq!(noise_power(1.0, 0.0), 1.0, epsilon = 1e-15);
        let mut rng = trial_rng(4, 0);
        let chan = sample_channel(4, 8, 0.5, &mut rng).unwrap();
        let clean = Observation::from_parts(&chan.a, &cons, vec![0, 1, 2, 3], vec![Complex64::new(0.0, 0.0); 8], 0.1).unwrap();
        let x = nalgebra::DVector::from_vec(clean.x_true.clone());
        let ax = &chan.a * x;
        for i in 0..8 {
            assert_eq!(clean.y[i], ax[i]);
        }

        let a = DMatrix::<Complex64>::identity(1000, 1);
        let mut p = 0.0;
        let mut count = 0;
        while count < 1_000_000 {
            let obs = make_observation(&a, &cons, 3.0, &mut rng);
            p += obs.w.iter().map(|w| w.norm_sqr()).sum::<f64>();
            count += obs.w.len();
        }
        let n0 = noise_power(1.0, 3.0);
        assert!((p / count as f64 / n0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn same_seed_same_draw() {
        let cons = Constellation::qam(16, 1.0).unwrap();
        let model = KroneckerChannel::new(6, 8, 0.7).unwrap();
        let draw = |s| {
            let mut rng = trial_rng(s, 17);
            let c = model.sample(&mut rng);
            let o = make_observation(&c.a, &cons, 5.0, &mut rng);
            (c.a, o.x_indices, o.w)
        };
        let (a1, x1, w1) = draw(1);
        let (a2, x2, w2) = draw(1);
        assert_eq!(a1, a2);
        assert_eq!(x1, x2);
        assert_eq!(w1, w2);
    }
}
