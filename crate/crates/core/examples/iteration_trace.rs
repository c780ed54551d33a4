// Usage: cargo run --release --example iteration_trace
//
// Instantaneous BER per iteration at (64, 64), ρ = 0.8, Es/N0 = −2 dB.
// GaBP with the annealed denoiser bottoms out early and then degrades;
// GAMP and MF-EP keep improving until the last iteration.

use mpdetect::harness::{run_iteration_trace, ExperimentConfig};

fn main() -> mpdetect::Result<()> {
    let algorithms = ["gabp-add", "mfep-add", "gamp-add"]
        .iter()
        .map(|s| s.parse())
        .collect::<mpdetect::Result<Vec<_>>>()?;
    let mut cfg = ExperimentConfig::new(64, 64, algorithms, vec![-2.0], 200);
    cfg.rho = vec![0.8];
    cfg.t = 16;
    cfg.seed = 3;

    let res = run_iteration_trace(&cfg)?;
    print!("{:>3}", "t");
    for a in &cfg.algorithms {
        print!(" {:>10}", a.label());
    }
    println!();
    for t in 0..=cfg.t {
        print!("{t:>3}");
        for a in &cfg.algorithms {
            let r = res
                .records
                .iter()
                .find(|r| r.t == t && r.algorithm == a.algorithm.to_string() && r.denoiser_mode == a.denoiser_mode())
                .expect("one row per algorithm and iteration");
            print!(" {:>10.4}", r.ber);
        }
        println!();
    }
    Ok(())
}
