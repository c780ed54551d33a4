use mpdetect::harness::{execute, run_ber_sweep, AlgorithmSpec, Command, ExperimentConfig};
use mpdetect::prelude::*;

fn specs(list: &[&str]) -> Vec<AlgorithmSpec> {
    list.iter().map(|s| s.parse().unwrap()).collect()
}

#[test]
fn uncorrelated_gabp_reaches_low_ber() {
    let mut cfg = ExperimentConfig::new(16, 32, specs(&["gabp"]), vec![12.0], 2000);
    cfg.seed = 3;
    let r = &run_ber_sweep(&cfg).unwrap().records[0];
    assert_eq!(r.bits, 2000 * 32);
    assert!(r.ber < 1e-3, "{}", r.ber);
}

#[test]
fn sixteen_qam_detectors_work_at_high_snr() {
    let mut cfg = ExperimentConfig::new(8, 16, specs(&["gamp-add", "mfep-add", "lmmse-ep", "mfb"]), vec![30.0], 100);
    cfg.q = 16;
    cfg.rho = vec![0.3];
    cfg.t = 32;
    for r in run_ber_sweep(&cfg).unwrap().records {
        assert!(r.ber < 1e-3, "{} {}", r.algorithm, r.ber);
    }
}

#[test]
fn realizations_are_shared_across_points() {
    // identical trial streams: only the noise scale differs between Es/N0 points
    let cons = Constellation::qam(4, 1.0).unwrap();
    let chan = KroneckerChannel::new(4, 4, 0.5).unwrap();
    let (a1, o1) = mpdetect::harness::draw_trial(5, 17, &chan, &cons, 0.0);
    let (a2, o2) = mpdetect::harness::draw_trial(5, 17, &chan, &cons, 10.0);
    assert_eq!(a1, a2);
    assert_eq!(o1.x_indices, o2.x_indices);
    let ratio = (o1.n0 / o2.n0).sqrt();
    for (w1, w2) in o1.w.iter().zip(&o2.w) {
        assert!((w1 - w2 * ratio).norm() < 1e-12);
    }
}

#[test]
fn execute_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::new(4, 8, specs(&["gamp-add", "mfb"]), vec![0.0, 5.0], 20);
    cfg.outputs = dir.path().join("x").to_string_lossy().into_owned();
    cfg.t = 8;
    cfg.snapshot_ts = vec![2, 8];
    cfg.hist_t = 8;
    for cmd in Command::ALL {
        let mut cfg = cfg.clone();
        if matches!(cmd, Command::RhoSweep | Command::CorrDiag | Command::Histogram) {
            cfg.esn0_db = vec![5.0];
        }
        let report = execute(cmd, &cfg).unwrap();
        for p in &report.outputs {
            assert!(std::fs::metadata(p).unwrap().len() > 0, "{}", p.display());
        }
        let meta: serde_json::Value = serde_json::from_slice(&std::fs::read(&report.metadata).unwrap()).unwrap();
        assert_eq!(meta["command"], cmd.name());
        assert_eq!(meta["xi"], 2.0);
        assert!(meta["wall_seconds"].as_f64().unwrap() >= 0.0);
        assert_eq!(meta["config"]["M"], 4);
    }
    let ber = std::fs::read_to_string(dir.path().join("x_ber.csv")).unwrap();
    assert_eq!(
        ber.lines().next().unwrap(),
        "algorithm,denoiser_mode,M,N,Q,rho,EsN0_dB,T,bits,bit_errors,ber,ci95_low,ci95_high,trials,diverged_trials"
    );
    assert_eq!(ber.lines().count(), 1 + 2 * 2);
    let gamma = std::fs::read_to_string(dir.path().join("x_gamma_gamp-add_t8.csv")).unwrap();
    assert_eq!(gamma.lines().count(), 8);
    assert!(gamma.lines().all(|l| l.split(',').count() == 8));
}
