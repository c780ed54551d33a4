//! Discrete-valued signal estimation from noisy linear measurements with
//! low-complexity Bayesian message passing.
//!
//! The crate provides three O(MN) message-passing detectors (GaBP, MF-EP and
//! GAMP), each of which can run with the Bayes-optimal discrete denoiser or
//! with the annealed discrete denoiser (ADD) driven by an inverse-temperature
//! schedule. LMMSE, LMMSE-EP and the matched-filter bound are included as
//! baselines, together with a Kronecker-correlated MU-MIMO channel generator
//! and a deterministic Monte-Carlo harness with belief-correlation
//! diagnostics.
//!
//! ```
//! use mpdetect::prelude::*;
//! use rand::SeedableRng;
//!
//! let cons = Constellation::qam(4, 1.0).unwrap();
//! let model = KroneckerChannel::new(8, 16, 0.5).unwrap();
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let chan = model.sample(&mut rng);
//! let obs = make_observation(&chan.a, &cons, 20.0, &mut rng);
//!
//! let cfg = DetectorConfig::new(Algorithm::Gamp).annealed(3.0, 2.0);
//! let run = detect(&cfg, &obs.y, &chan.a, obs.n0, &cons, Some(&obs.x_indices)).unwrap();
//! assert_eq!(run.hard_indices.len(), 8);
//! ```

pub mod channel;
pub mod constellation;
pub mod denoiser;
pub mod detectors;
pub mod diagnostics;
mod error;
pub mod harness;
pub mod rng;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::channel::{
        exp_correlation, make_observation, matrix_sqrt, sample_channel, ChannelRealization,
        CorrelationSpec, KroneckerChannel, Observation,
    };
    pub use crate::constellation::Constellation;
    pub use crate::denoiser::{annealed_denoise, bayes_denoise, AnnealSchedule, DenoiseResult};
    pub use crate::detectors::{
        detect, run_gabp, run_gamp, run_lmmse, run_lmmse_ep, run_mfb, run_mfep, Algorithm,
        DenoiserMode, DetectorConfig, DetectorRun, TraceLevel,
    };
    pub use crate::diagnostics::{BeliefHistogram, CorrAccumulator};
    pub use crate::{Error, Result};
    pub use num_complex::Complex64;
}
