//! Gray-coded square QAM priors and bit/symbol mapping.

use num_complex::Complex64;

use crate::{Error, Result};

/// A finite discrete prior over complex symbols.
///
/// Point `q` carries the bit label `labels[q]` (MSB first, `bits_per_symbol`
/// bits). For the QAM constructor the label of point `q` is `q` itself, so
/// the bit map is the identity on indices and the Gray structure lives in
/// the placement of the points.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    points: Vec<Complex64>,
    probs: Vec<f64>,
    log_probs: Vec<f64>,
    labels: Vec<u32>,
    index_of_label: Vec<usize>,
    bits_per_symbol: usize,
    scale: f64,
    symbol_energy: f64,
}

fn gray_inverse(mut g: u32) -> u32 {
    let mut i = g;
    while g > 1 {
        g >>= 1;
        i ^= g;
    }
    i
}

impl Constellation {
    /// Uniform Gray-coded `order`-QAM with average symbol energy `es`.
    ///
    /// Per-axis levels are `{±c, ±3c, …, ±(√Q−1)c}` with `c = √(3Es/(2(Q−1)))`.
    /// The first half of each label selects the in-phase level, the second
    /// half the quadrature level, each through a reflected Gray code.
    pub fn qam(order: usize, es: f64) -> Result<Self> {
        let side = match order {
            4 => 2u32,
            16 => 4,
            64 => 8,
            _ => return Err(Error::UnsupportedOrder(order)),
        };
        if !(es > 0.0 && es.is_finite()) {
            return Err(Error::invalid("symbol energy", format!("{es} is not positive")));
        }
        let axis_bits = side.trailing_zeros();
        let c = (3.0 * es / (2.0 * (order as f64 - 1.0))).sqrt();
        let level = |g: u32| (2.0 * gray_inverse(g) as f64 - (side as f64 - 1.0)) * c;

        let points: Vec<Complex64> = (0..order as u32)
            .map(|label| {
                let gi = label >> axis_bits;
                let gq = label & (side - 1);
                Complex64::new(level(gi), level(gq))
            })
            .collect();
        let p = 1.0 / order as f64;
        Ok(Self {
            points,
            probs: vec![p; order],
            log_probs: vec![p.ln(); order],
            labels: (0..order as u32).collect(),
            index_of_label: (0..order).collect(),
            bits_per_symbol: 2 * axis_bits as usize,
            scale: c,
            symbol_energy: es,
        })
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// The per-axis half-spacing `c`.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn c_sq(&self) -> f64 {
        self.scale * self.scale
    }

    /// Average symbol energy `Es` (the prior variance).
    pub fn symbol_energy(&self) -> f64 {
        self.symbol_energy
    }

    /// Largest per-axis amplitude `(√Q−1)c`.
    pub fn max_amplitude(&self) -> f64 {
        self.points.iter().map(|p| p.re.abs()).fold(0.0, f64::max)
    }

    pub fn label(&self, index: usize) -> u32 {
        self.labels[index]
    }

    pub fn index_of_label(&self, label: u32) -> usize {
        self.index_of_label[label as usize]
    }

    /// Writes the bits of point `index`, MSB first.
    pub fn bits_of(&self, index: usize, out: &mut Vec<u8>) {
        let label = self.labels[index];
        for b in (0..self.bits_per_symbol).rev() {
            out.push(((label >> b) & 1) as u8);
        }
    }

    /// Maps a bit vector onto point indices, `bits_per_symbol` bits per symbol.
    pub fn map_bits_to_indices(&self, bits: &[u8]) -> Result<Vec<usize>> {
        let k = self.bits_per_symbol;
        if bits.len() % k != 0 {
            return Err(Error::DimensionMismatch {
                context: "bit vector length (multiple of bits per symbol)",
                expected: bits.len().next_multiple_of(k),
                found: bits.len(),
            });
        }
        bits.chunks(k)
            .map(|group| {
                let mut label = 0u32;
                for &b in group {
                    if b > 1 {
                        return Err(Error::invalid("bit", format!("value {b} is not 0 or 1")));
                    }
                    label = (label << 1) | b as u32;
                }
                Ok(self.index_of_label(label))
            })
            .collect()
    }

    /// Maps a bit vector onto symbols via the Gray map.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        Ok(self
            .map_bits_to_indices(bits)?
            .into_iter()
            .map(|q| self.points[q])
            .collect())
    }

    /// Nearest point (lowest index on ties) and its bit label.
    pub fn demap_hard(&self, z: Complex64) -> (usize, u32) {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (q, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = q;
            }
        }
        (best, self.labels[best])
    }

    /// Bit errors between two point indices.
    pub fn bit_errors(&self, a: usize, b: usize) -> usize {
        (self.labels[a] ^ self.labels[b]).count_ones() as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn qam4_scale_and_points() {
        let cons = Constellation::qam(4, 1.0).unwrap();
        let c = 0.5f64.sqrt();
        assert_abs_diff_eq!(cons.scale(), c, epsilon = 1e-15);
        for p in cons.points() {
            assert_abs_diff_eq!(p.re.abs(), c, epsilon = 1e-15);
            assert_abs_diff_eq!(p.im.abs(), c, epsilon = 1e-15);
        }
    }

    #[test]
    fn qam16_scale() {
        let cons = Constellation::qam(16, 1.0).unwrap();
        assert_abs_diff_eq!(cons.scale(), 0.1f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(cons.max_amplitude(), 3.0 * 0.1f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn moments_match_energy() {
        for (q, es) in [(4, 1.0), (16, 1.0), (64, 2.5)] {
            let cons = Constellation::qam(q, es).unwrap();
            let mean: Complex64 = cons
                .points()
                .iter()
                .zip(cons.probs())
                .map(|(x, p)| x * p)
                .sum();
            let energy: f64 = cons
                .points()
                .iter()
                .zip(cons.probs())
                .map(|(x, p)| x.norm_sqr() * p)
                .sum();
            assert_abs_diff_eq!(mean.norm(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(energy, es, epsilon = 1e-12);
            assert_abs_diff_eq!(cons.probs().iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rejects_unsupported_order() {
        assert!(matches!(Constellation::qam(8, 1.0), Err(Error::UnsupportedOrder(8))));
        assert!(matches!(Constellation::qam(256, 1.0), Err(Error::UnsupportedOrder(256))));
        assert!(Constellation::qam(4, 0.0).is_err());
    }

    #[test]
    fn qam4_gray_order_by_enumeration() {
        // Enumerate the four labels and check quadrant placement and one-bit adjacency.
        let cons = Constellation::qam(4, 1.0).unwrap();
        let pts: Vec<Complex64> = [[0, 0], [0, 1], [1, 1], [1, 0]]
            .iter()
            .map(|b| cons.map_bits(b).unwrap()[0])
            .collect();
        let quadrants: std::collections::HashSet<(bool, bool)> =
            pts.iter().map(|p| (p.re > 0.0, p.im > 0.0)).collect();
        assert_eq!(quadrants.len(), 4);
        let c = cons.scale();
        for i in 0..4 {
            for j in 0..4 {
                let d = (pts[i] - pts[j]).norm();
                // axis neighbours sit 2c apart and must differ in one bit
                if (d - 2.0 * c).abs() < 1e-12 {
                    let (qi, _) = cons.demap_hard(pts[i]);
                    let (qj, _) = cons.demap_hard(pts[j]);
                    assert_eq!(cons.bit_errors(qi, qj), 1);
                }
            }
        }
    }

    #[test]
    fn gray_property_along_each_axis() {
        for q in [4, 16, 64] {
            let cons = Constellation::qam(q, 1.0).unwrap();
            let step = 2.0 * cons.scale();
            for a in 0..q {
                for b in 0..q {
                    let d = cons.points()[a] - cons.points()[b];
                    let adjacent = ((d.re.abs() - step).abs() < 1e-9 && d.im.abs() < 1e-9)
                        || ((d.im.abs() - step).abs() < 1e-9 && d.re.abs() < 1e-9);
                    if adjacent {
                        assert_eq!(cons.bit_errors(a, b), 1, "Q={q} points {a},{b}");
                    }
                }
            }
        }
    }

    #[test]
    fn all_patterns_distinct() {
        for q in [4, 16, 64] {
            let cons = Constellation::qam(q, 1.0).unwrap();
            let mut pts: Vec<(i64, i64)> = cons
                .points()
                .iter()
                .map(|p| ((p.re * 1e9) as i64, (p.im * 1e9) as i64))
                .collect();
            pts.sort();
            pts.dedup();
            assert_eq!(pts.len(), q);
        }
    }

    #[test]
    fn demap_ties_and_exact_points() {
        let cons = Constellation::qam(4, 1.0).unwrap();
        assert_eq!(cons.demap_hard(Complex64::new(0.0, 0.0)).0, 0);
        for q in [4, 16] {
            let cons = Constellation::qam(q, 1.0).unwrap();
            for (i, p) in cons.points().iter().enumerate() {
                assert_eq!(cons.demap_hard(*p).0, i);
            }
        }
    }

    #[test]
    fn map_rejects_bad_length() {
        let cons = Constellation::qam(16, 1.0).unwrap();
        assert!(matches!(
            cons.map_bits(&[0, 1, 1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empirical_energy_within_one_percent() {
        let cons = Constellation::qam(16, 1.0).unwrap();
        let mut rng = crate::rng::trial_rng(5, 0);
        let n = 1_000_000;
        let e: f64 = (0..n)
            .map(|_| cons.points()[rng.random_range(0..16)].norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((e - 1.0).abs() < 0.01, "{e}");
    }

    proptest! {
        #[test]
        fn round_trip(qi in 0usize..3, seed in any::<u64>()) {
            let q = [4, 16, 64][qi];
            let cons = Constellation::qam(q, 1.0).unwrap();
            let mut rng = crate::rng::trial_rng(seed, 0);
            let bits: Vec<u8> = (0..cons.bits_per_symbol() * 20).map(|_| rng.random_range(0..2)).collect();
            let syms = cons.map_bits(&bits).unwrap();
            let mut back = Vec::new();
            for s in syms {
                let (idx, _) = cons.demap_hard(s);
                cons.bits_of(idx, &mut back);
            }
            prop_assert_eq!(back, bits);
        }

        #[test]
        fn demap_matches_brute_force(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let cons = Constellation::qam(16, 1.0).unwrap();
            let z = Complex64::new(re, im);
            let d: Vec<f64> = cons.points().iter().map(|p| (z - p).norm()).collect();
            let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
            let brute = d.iter().position(|&x| x == min).unwrap();
            prop_assert_eq!(cons.demap_hard(z).0, brute);
        }
    }
}
