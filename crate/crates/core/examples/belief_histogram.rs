// Usage: cargo run --release --example belief_histogram
//
// Standardized LE-output residuals at iteration 60 against the standard
// normal. Tail fractions beyond 3, 4 and 5 σ expose GaBP's outliers.

use mpdetect::harness::output::gaussian_tail;
use mpdetect::harness::{collect_belief_diagnostics, ExperimentConfig};

fn main() -> mpdetect::Result<()> {
    let algorithms = ["gabp-add", "mfep-add", "gamp-add"]
        .iter()
        .map(|s| s.parse())
        .collect::<mpdetect::Result<Vec<_>>>()?;
    let mut cfg = ExperimentConfig::new(64, 64, algorithms, vec![-2.0], 400);
    cfg.rho = vec![0.8];
    cfg.seed = 5;
    cfg.hist_bins = 61;

    let diag = collect_belief_diagnostics(&cfg, &[], Some(60))?;
    println!("{:<9} {:>9} {:>11} {:>11} {:>11}", "alg", "samples", ">3σ", ">4σ", ">5σ");
    for h in &diag.hist {
        let f = |k| h.histogram.tail_fraction(k).unwrap_or(f64::NAN);
        println!(
            "{:<9} {:>9} {:>11.3e} {:>11.3e} {:>11.3e}",
            h.spec.label(),
            h.histogram.total,
            f(3),
            f(4),
            f(5)
        );
    }
    println!("{:<9} {:>9} {:>11.3e} {:>11.3e} {:>11.3e}", "gaussian", "", gaussian_tail(3), gaussian_tail(4), gaussian_tail(5));

    // coarse text rendering of the GaBP histogram against the overlay
    let h = &diag.hist[0].histogram;
    for (i, e) in h.bin_edges.windows(2).enumerate().step_by(3) {
        let bar = "#".repeat((h.density[i] * 100.0).round() as usize);
        println!("{:>6.2} {:>8.4} {:>8.4} {bar}", 0.5 * (e[0] + e[1]), h.density[i], h.ideal_overlay[i]);
    }
    Ok(())
}
