// Usage: cargo run --release --example detect_once
//
// One realization of a correlated (16, 32) uplink, detected by every
// algorithm with the plain and the annealed denoiser.

use mpdetect::prelude::*;
use mpdetect::rng::trial_rng;

fn main() -> Result<()> {
    let cons = Constellation::qam(4, 1.0)?;
    let chan = KroneckerChannel::new(16, 32, 0.9)?;
    let mut rng = trial_rng(2024, 0);
    let a = chan.sample(&mut rng).a;
    let obs = make_observation(&a, &cons, 14.0, &mut rng);

    let mut configs = Vec::new();
    for alg in [Algorithm::Gabp, Algorithm::Mfep, Algorithm::Gamp] {
        configs.push(DetectorConfig::new(alg));
        configs.push(DetectorConfig::new(alg).annealed(3.0, 2.0));
    }
    configs.push(DetectorConfig::new(Algorithm::Lmmse));
    configs.push(DetectorConfig::new(Algorithm::LmmseEp));
    configs.push(DetectorConfig::new(Algorithm::Mfb));

    let bits = 16 * cons.bits_per_symbol();
    println!("{:<10} {:<6} {:>10} {:>12}", "algorithm", "mode", "bit errors", "mean var");
    for cfg in &configs {
        let run = detect(cfg, &obs.y, &a, obs.n0, &cons, Some(&obs.x_indices))?;
        let mean_var = run.soft_vars.iter().sum::<f64>() / run.soft_vars.len().max(1) as f64;
        let errors = match &run.diverged {
            Some(d) => format!("diverged@{}", d.iteration),
            None => format!("{}/{bits}", run.bit_errors(&cons, &obs.x_indices)),
        };
        println!("{:<10} {:<6} {errors:>10} {mean_var:>12.3e}", cfg.algorithm.to_string(), cfg.denoiser.name());
    }
    Ok(())
}
