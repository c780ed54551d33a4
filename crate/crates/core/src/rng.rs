//! Reproducible random streams for Monte-Carlo trials.
//!
//! Every trial owns a ChaCha8 stream keyed by `(master_seed, trial_index)`,
//! so results never depend on how trials are scheduled across workers.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type TrialRng = ChaCha8Rng;

/// Stream for one trial. Distinct trial indices select distinct ChaCha
/// streams under the same key.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Circularly-symmetric complex Gaussian sample with `E|z|^2 = var`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (0.5 * var).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}
