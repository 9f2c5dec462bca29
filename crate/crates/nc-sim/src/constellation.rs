//! Gray-labelled square QAM constellations.
//!
//! A constellation for rate `R` bits per symbol (`R` in {2, 4, 6}) is the
//! square grid with per-axis amplitude levels {±1, ±3, …, ±(2^(R/2) − 1)},
//! scaled so the alphabet has zero mean and average symbol energy `2P`.
//! Labels are `R`-bit integers built from one binary-reflected Gray code per
//! axis, in-phase bits in the high half, quadrature bits in the low half, so
//! grid neighbours always differ in exactly one label bit.

use num_complex::Complex64;

use crate::{Error, Result};

/// Modulation rates with a square QAM alphabet in this toolkit.
pub const SUPPORTED_RATES: [u32; 3] = [2, 4, 6];

/// Square 2^R-QAM alphabet with Gray labelling and energy `2P`.
#[derive(Debug, Clone)]
pub struct Constellation {
    rate: u32,
    power: f64,
    scale: f64,
    /// Point for each label; index equals label.
    points: Vec<Complex64>,
}

impl Constellation {
    /// Builds the rate-`R` alphabet normalized to average symbol energy `2p`.
    ///
    /// Errors with [`Error::UnsupportedRate`] unless `rate` is 2, 4 or 6,
    /// and [`Error::OutOfRange`] unless `p > 0`.
    pub fn new(rate: u32, p: f64) -> Result<Self> {
        if !SUPPORTED_RATES.contains(&rate) {
            return Err(Error::UnsupportedRate(rate));
        }
        if !p.is_finite() || p <= 0.0 {
            return Err(Error::OutOfRange {
                name: "p",
                value: p,
                constraint: "symbol power must be finite and positive",
            });
        }
        let m = 1u32 << (rate / 2); // levels per axis
        // E[level^2] over {±1, ±3, …, ±(m−1)} is (m²−1)/3, and the two axes
        // are independent, so scale²·2(m²−1)/3 = 2p fixes the grid scale.
        let scale = (3.0 * p / f64::from(m * m - 1)).sqrt();
        let size = 1usize << rate;
        let half_bits = rate / 2;
        let mut points = vec![Complex64::new(0.0, 0.0); size];
        for (label, point) in points.iter_mut().enumerate() {
            let gi = (label as u32) >> half_bits;
            let gq = (label as u32) & (m - 1);
            let re = level(gray_inverse(gi), m);
            let im = level(gray_inverse(gq), m);
            *point = Complex64::new(scale * re, scale * im);
        }
        Ok(Self {
            rate,
            power: p,
            scale,
            points,
        })
    }

    /// Bits per symbol.
    pub fn rate(&self) -> u32 {
        self.rate
    }

    /// Reference power `P`; average symbol energy is `2P`.
    pub fn power(&self) -> f64 {
        self.power
    }

    /// Grid scale applied to the odd-integer levels.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Number of points, `2^R`.
    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// All points in label order: `points()[label]` is the point for `label`.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Point carrying `label`.
    pub fn point(&self, label: u16) -> Complex64 {
        assert!(
            (label as usize) < self.points.len(),
            "label {label} out of range for rate {}",
            self.rate
        );
        self.points[label as usize]
    }

    /// Grid coordinates (in-phase index, quadrature index) of a label,
    /// each in `0..2^(R/2)`. Consecutive indices are grid neighbours.
    #[cfg(test)]
    fn axis_indices(&self, label: u16) -> (u32, u32) {
        let m = 1u32 << (self.rate / 2);
        let gi = u32::from(label) >> (self.rate / 2);
        let gq = u32::from(label) & (m - 1);
        (gray_inverse(gi), gray_inverse(gq))
    }
}

/// Galois-field superposition of two labels: bitwise XOR.
///
/// For equal-rate labels the result is again a valid label, superposition
/// with the zero label is the identity, and every label is its own inverse,
/// so `gf_superpose(a, gf_superpose(a, b)) == b`.
pub fn gf_superpose(a: u16, b: u16) -> u16 {
    a ^ b
}

/// Amplitude level for a per-axis index in `0..m`: {−(m−1), …, −1, 1, …, m−1}.
fn level(index: u32, m: u32) -> f64 {
    f64::from(2 * index as i32 - (m as i32 - 1))
}

/// Binary-reflected Gray code of an index.
#[cfg(test)]
fn gray(index: u32) -> u32 {
    index ^ (index >> 1)
}

/// Inverse of [`gray`].
fn gray_inverse(code: u32) -> u32 {
    let mut index = code;
    let mut shift = 1;
    while (code >> shift) != 0 {
        index ^= code >> shift;
        shift += 1;
    }
    index
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unsupported_rates() {
        for rate in [0, 1, 3, 5, 7, 8] {
            assert!(matches!(
                Constellation::new(rate, 1.0),
                Err(Error::UnsupportedRate(r)) if r == rate
            ));
        }
    }

    #[test]
    fn rejects_non_positive_power() {
        assert!(Constellation::new(2, 0.0).is_err());
        assert!(Constellation::new(2, -1.0).is_err());
        assert!(Constellation::new(2, f64::NAN).is_err());
    }

    #[test]
    fn qpsk_is_unit_grid_with_symbol_energy_two() {
        let c = Constellation::new(2, 1.0).unwrap();
        assert_eq!(c.size(), 4);
        let mut got: Vec<(i64, i64)> = c
            .points()
            .iter()
            .map(|x| (x.re.round() as i64, x.im.round() as i64))
            .collect();
        got.sort_unstable();
        assert_eq!(got, vec![(-1, -1), (-1, 1), (1, -1), (1, 1)]);
        for x in c.points() {
            assert!((x.norm_sqr() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sixteen_qam_scale_is_inverse_sqrt_five() {
        let c = Constellation::new(4, 1.0).unwrap();
        // Per-axis levels ±1, ±3 give mean squared level 5 per axis, so the
        // grid must shrink by 1/√5 to reach symbol energy 2.
        assert!((c.scale() - 1.0 / 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn zero_mean_and_energy_normalization() {
        for rate in SUPPORTED_RATES {
            for p in [1.0, 2.5] {
                let c = Constellation::new(rate, p).unwrap();
                let n = c.size() as f64;
                let mean: Complex64 = c.points().iter().sum::<Complex64>() / n;
                let energy: f64 = c.points().iter().map(Complex64::norm_sqr).sum::<f64>() / n;
                assert!(mean.norm() < 1e-13, "rate {rate}: mean {mean}");
                assert!(
                    (energy - 2.0 * p).abs() < 1e-12 * 2.0 * p,
                    "rate {rate}: energy {energy} want {}",
                    2.0 * p
                );
            }
        }
    }

    #[test]
    fn labels_biject_with_points() {
        for rate in SUPPORTED_RATES {
            let c = Constellation::new(rate, 1.0).unwrap();
            for label in 0..c.size() as u16 {
                let x = c.point(label);
                let found = c
                    .points()
                    .iter()
                    .position(|y| y.re == x.re && y.im == x.im)
                    .expect("point present");
                assert_eq!(found, label as usize, "rate {rate} label {label}");
            }
        }
    }

    #[test]
    fn grid_neighbours_differ_in_one_label_bit() {
        for rate in SUPPORTED_RATES {
            let c = Constellation::new(rate, 1.0).unwrap();
            let n = c.size() as u16;
            for a in 0..n {
                let (ia, qa) = c.axis_indices(a);
                for b in 0..n {
                    let (ib, qb) = c.axis_indices(b);
                    let adjacent = (ia == ib && qa.abs_diff(qb) == 1)
                        || (qa == qb && ia.abs_diff(ib) == 1);
                    if adjacent {
                        assert_eq!(
                            (a ^ b).count_ones(),
                            1,
                            "rate {rate}: labels {a} and {b} are grid neighbours"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn gray_roundtrip() {
        for index in 0..64 {
            assert_eq!(gray_inverse(gray(index)), index);
        }
        // Consecutive codes differ in one bit.
        for index in 0..63 {
            assert_eq!((gray(index) ^ gray(index + 1)).count_ones(), 1);
        }
    }

    #[test]
    fn gf_superpose_is_xor_group() {
        assert_eq!(gf_superpose(0b1010, 0b0110), 0b1100);
        for rate in [2u32, 4] {
            let n = 1u16 << rate;
            for a in 0..n {
                assert_eq!(gf_superpose(a, 0), a, "identity");
                assert_eq!(gf_superpose(a, a), 0, "self-inverse");
                for b in 0..n {
                    assert_eq!(gf_superpose(a, b), gf_superpose(b, a), "commutes");
                    assert_eq!(gf_superpose(a, gf_superpose(a, b)), b, "cancels");
                    assert!(gf_superpose(a, b) < n, "closed over rate-{rate} labels");
                }
            }
        }
    }
}
