// Usage: cargo run --release --example ber_sweep
//
// BER against Es/N0 on a correlated (16, 32) 4-QAM uplink through the
// harness API, written to target/examples/ber_sweep_ber.csv.

use mpdetect::harness::{execute, run_ber_sweep, Command, ExperimentConfig};

fn main() -> mpdetect::Result<()> {
    let algorithms = ["gabp", "gamp", "gabp-add", "mfep-add", "gamp-add", "lmmse", "lmmse-ep", "mfb"]
        .iter()
        .map(|s| s.parse())
        .collect::<mpdetect::Result<Vec<_>>>()?;
    let mut cfg = ExperimentConfig::new(16, 32, algorithms, vec![2.0, 6.0, 10.0, 14.0], 300);
    cfg.rho = vec![0.9];
    cfg.seed = 7;
    cfg.outputs = "target/examples/ber_sweep".into();

    let res = run_ber_sweep(&cfg)?;
    println!("{:<9} {:<5} {:>7} {:>10}", "alg", "mode", "EsN0", "BER");
    for r in &res.records {
        println!("{:<9} {:<5} {:>7.1} {:>10.3e}", r.algorithm, r.denoiser_mode, r.esn0_db, r.ber);
    }

    let report = execute(Command::BerSweep, &cfg)?;
    for p in report.outputs.iter().chain([&report.metadata]) {
        println!("wrote {}", p.display());
    }
    Ok(())
}
