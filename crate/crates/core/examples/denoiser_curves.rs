// Usage: cargo run --release --example denoiser_curves > curves.csv
//
// Real part of the annealed denoiser output against the real part of its
// input for c²β ∈ {0.2, 1, 5}, for 4-QAM and 16-QAM. Larger β widens the
// inactive region where the output is already a hard decision.

use mpdetect::prelude::*;

fn main() -> Result<()> {
    println!("Q,c2_beta,re_y,re_eta");
    for q in [4, 16] {
        let cons = Constellation::qam(q, 1.0)?;
        let span = cons.max_amplitude() + 2.0 * cons.scale();
        for c2_beta in [0.2, 1.0, 5.0] {
            let beta = c2_beta / cons.c_sq();
            for k in 0..=400 {
                let re = -span + 2.0 * span * k as f64 / 400.0;
                let out = annealed_denoise(&cons, Complex64::new(re, 0.0), beta)?;
                println!("{q},{c2_beta},{re:.5},{:.6}", out.mean.re);
            }
        }
    }
    Ok(())
}
