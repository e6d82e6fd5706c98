//! Gray-labeled, unit-average-energy constellations for the power-domain users.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Constellation points indexed by their integer label (bits MSB first).
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    points: Vec<Complex64>,
}

fn gray_decode(mut g: usize) -> usize {
    let mut b = g;
    while g > 1 {
        g >>= 1;
        b ^= g;
    }
    b
}

impl Constellation {
    /// BPSK (2), QPSK (4), 8-PSK (8) and square QAM (16, 64, 256, ...).
    pub fn new(order: usize) -> Result<Self> {
        let points = match order {
            2 => vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            8 => (0..8)
                .map(|label| Complex64::from_polar(1.0, 2.0 * PI * gray_decode(label) as f64 / 8.0))
                .collect(),
            m if m >= 4 && m.is_power_of_two() && m.trailing_zeros() % 2 == 0 => {
                let half = (m.trailing_zeros() / 2) as usize;
                let side = 1usize << half;
                let norm = (2.0 * (m as f64 - 1.0) / 3.0).sqrt();
                let level = |g: usize| ((side - 1) as f64 - 2.0 * gray_decode(g) as f64) / norm;
                (0..m)
                    .map(|label| {
                        let i_bits = label >> half;
                        let q_bits = label & (side - 1);
                        Complex64::new(level(i_bits), level(q_bits))
                    })
                    .collect()
            }
            m => return Err(Error::UnsupportedOrder(m)),
        };
        Ok(Self { order, points })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order.trailing_zeros() as usize
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    /// Label of the point nearest to `z`, lowest label on ties.
    pub fn nearest(&self, z: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (label, p) in self.points.iter().enumerate() {
            let d = (z - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

/// Integer label to `n` bits, MSB first.
pub fn label_to_bits(label: usize, n: usize) -> Vec<u8> {
    (0..n).rev().map(|s| ((label >> s) & 1) as u8).collect()
}

pub fn bits_to_label(bits: &[u8]) -> usize {
    bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1))
}

/// Maps `log2(mod_order)` bits to a constellation point.
pub fn modulate(bits: &[u8], mod_order: usize) -> Result<Complex64> {
    let c = Constellation::new(mod_order)?;
    if bits.len() != c.bits_per_symbol() {
        return Err(Error::LengthMismatch {
            expected: c.bits_per_symbol(),
            got: bits.len(),
        });
    }
    Ok(c.point(bits_to_label(bits)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn bpsk_and_qpsk_conventions() {
        assert!(close(modulate(&[0], 2).unwrap(), Complex64::new(1.0, 0.0)));
        assert!(close(modulate(&[1], 2).unwrap(), Complex64::new(-1.0, 0.0)));
        let s = 0.5f64.sqrt();
        assert!(close(modulate(&[0, 0], 4).unwrap(), Complex64::new(s, s)));
        assert!(close(modulate(&[1, 0], 4).unwrap(), Complex64::new(-s, s)));
    }

    #[test]
    fn unsupported_orders() {
        for m in [0, 1, 3, 32, 128] {
            assert!(matches!(Constellation::new(m), Err(Error::UnsupportedOrder(_))));
        }
        assert!(matches!(modulate(&[0], 4), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn unit_energy_and_gray_neighbours() {
        for m in [2, 4, 8, 16, 64, 256] {
            let c = Constellation::new(m).unwrap();
            let e: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / m as f64;
            assert!((e - 1.0).abs() < 1e-12, "order {m} energy {e}");
            // nearest neighbours differ in exactly one bit
            let dmin = (0..m)
                .flat_map(|a| (0..m).filter(move |&b| b != a).map(move |b| (a, b)))
                .map(|(a, b)| (c.point(a) - c.point(b)).norm())
                .fold(f64::INFINITY, f64::min);
            for a in 0..m {
                for b in 0..m {
                    if a != b && (c.point(a) - c.point(b)).norm() < dmin + 1e-9 {
                        assert_eq!((a ^ b).count_ones(), 1, "order {m} labels {a} {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn nearest_inverts_modulation() {
        let c = Constellation::new(16).unwrap();
        for label in 0..16 {
            assert_eq!(c.nearest(c.point(label) * 1.05), label);
        }
    }
}
