//! GSSK constellation: which antenna index sets are used and how they are labeled.
//!
//! Of the `C(m_t, m_a)` possible sets only the first `N_H = 2^b_H` in
//! lexicographic order are kept, `b_H = floor(log2 C(m_t, m_a))`. The set at
//! position `p` carries the natural binary encoding of `p` over `b_H` bits,
//! most significant bit first.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is always integral at this point
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Spatial bits per channel use, `floor(log2 C(m_t, m_a))`.
pub fn spatial_bits(m_t: usize, m_a: usize) -> usize {
    let c = binomial(m_t, m_a);
    if c == 0 {
        0
    } else {
        (127 - c.leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AntennaSetCodebook {
    m_t: usize,
    m_a: usize,
    b_h: usize,
    /// 1-based antenna indices, each set sorted ascending.
    sets: Vec<Vec<usize>>,
}

impl AntennaSetCodebook {
    pub fn m_t(&self) -> usize {
        self.m_t
    }

    pub fn m_a(&self) -> usize {
        self.m_a
    }

    pub fn b_h(&self) -> usize {
        self.b_h
    }

    pub fn n_h(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn set(&self, index: usize) -> Result<&[usize]> {
        self.sets
            .get(index)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index,
                limit: self.n_h(),
            })
    }

    /// Label of the set at `index` as `b_h` bits, MSB first.
    pub fn label(&self, index: usize) -> Result<Vec<u8>> {
        if index >= self.n_h() {
            return Err(Error::IndexOutOfRange {
                index,
                limit: self.n_h(),
            });
        }
        Ok((0..self.b_h)
            .rev()
            .map(|shift| ((index >> shift) & 1) as u8)
            .collect())
    }
}

/// Builds the codebook for `m_a` active antennas out of `m_t`.
pub fn build_codebook(m_t: usize, m_a: usize) -> Result<AntennaSetCodebook> {
    if m_a == 0 || m_a > m_t {
        return Err(Error::InvalidAntennaConfig(format!(
            "need 1 <= m_a <= m_t, got m_a={m_a} m_t={m_t}"
        )));
    }
    if binomial(m_t, m_a) < 2 {
        return Err(Error::InvalidAntennaConfig(format!(
            "C({m_t}, {m_a}) < 2 leaves no spatial bit"
        )));
    }
    let b_h = spatial_bits(m_t, m_a);
    if b_h >= usize::BITS as usize - 1 {
        return Err(Error::InvalidAntennaConfig(format!(
            "codebook with {b_h} bits is too large"
        )));
    }
    let n_h = 1usize << b_h;
    let mut sets = Vec::with_capacity(n_h);
    let mut current: Vec<usize> = (1..=m_a).collect();
    loop {
        sets.push(current.clone());
        if sets.len() == n_h {
            break;
        }
        // advance to the next combination in lexicographic order
        let mut i = m_a;
        while i > 0 && current[i - 1] == m_t - m_a + i {
            i -= 1;
        }
        // n_h <= C(m_t, m_a) guarantees a successor exists
        debug_assert!(i > 0);
        current[i - 1] += 1;
        for j in i..m_a {
            current[j] = current[j - 1] + 1;
        }
    }
    Ok(AntennaSetCodebook {
        m_t,
        m_a,
        b_h,
        sets,
    })
}

/// Maps `b_h` bits (MSB first) to the index of the set carrying that label.
pub fn map_bits_to_set(bits: &[u8], codebook: &AntennaSetCodebook) -> Result<usize> {
    if bits.len() != codebook.b_h {
        return Err(Error::LengthMismatch {
            expected: codebook.b_h,
            got: bits.len(),
        });
    }
    Ok(bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ssk_degenerate_case() {
        let cb = build_codebook(4, 1).unwrap();
        assert_eq!(cb.b_h(), 2);
        assert_eq!(cb.sets(), &[vec![1], vec![2], vec![3], vec![4]]);
    }

    #[test]
    fn five_choose_two_keeps_first_eight_pairs() {
        let cb = build_codebook(5, 2).unwrap();
        assert_eq!(cb.n_h(), 8);
        assert_eq!(cb.b_h(), 3);
        let expected: Vec<Vec<usize>> = [(1, 2), (1, 3), (1, 4), (1, 5), (2, 3), (2, 4), (2, 5), (3, 4)]
            .iter()
            .map(|&(a, b)| vec![a, b])
            .collect();
        assert_eq!(cb.sets(), expected.as_slice());
    }

    #[test]
    fn eight_choose_three_has_five_bits() {
        assert_eq!(build_codebook(8, 3).unwrap().b_h(), 5);
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(matches!(build_codebook(4, 0), Err(Error::InvalidAntennaConfig(_))));
        assert!(matches!(build_codebook(3, 4), Err(Error::InvalidAntennaConfig(_))));
        assert!(matches!(build_codebook(2, 2), Err(Error::InvalidAntennaConfig(_))));
        assert!(matches!(build_codebook(1, 1), Err(Error::InvalidAntennaConfig(_))));
    }

    #[test]
    fn bit_mapping_examples() {
        let cb = build_codebook(4, 1).unwrap();
        assert_eq!(cb.set(map_bits_to_set(&[0, 0], &cb).unwrap()).unwrap(), &[1]);
        assert_eq!(cb.set(map_bits_to_set(&[1, 1], &cb).unwrap()).unwrap(), &[4]);
        let cb = build_codebook(5, 2).unwrap();
        assert_eq!(cb.set(map_bits_to_set(&[1, 0, 1], &cb).unwrap()).unwrap(), &[2, 4]);
        assert!(matches!(
            map_bits_to_set(&[1, 0], &cb),
            Err(Error::LengthMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(8, 3), 56);
        assert_eq!(binomial(8, 4), 70);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(spatial_bits(16, 2), 6);
        assert_eq!(spatial_bits(2, 2), 0);
    }

    proptest! {
        #[test]
        fn codebook_invariants(m_t in 2usize..14, m_a_raw in 1usize..14) {
            let m_a = 1 + m_a_raw % m_t;
            prop_assume!(binomial(m_t, m_a) >= 2);
            let cb = build_codebook(m_t, m_a).unwrap();
            prop_assert!(cb.n_h().is_power_of_two());
            prop_assert!(cb.n_h() as u128 <= binomial(m_t, m_a));
            prop_assert!(2 * cb.n_h() as u128 > binomial(m_t, m_a));
            for (p, set) in cb.sets().iter().enumerate() {
                prop_assert_eq!(set.len(), m_a);
                prop_assert!(set.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(set.iter().all(|&i| (1..=m_t).contains(&i)));
                if p > 0 {
                    prop_assert!(cb.sets()[p - 1] < *set);
                }
                let label = cb.label(p).unwrap();
                prop_assert_eq!(map_bits_to_set(&label, &cb).unwrap(), p);
            }
        }
    }
}
