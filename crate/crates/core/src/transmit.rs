use nalgebra::DVector;
use num_complex::Complex64;

use crate::codebook::AntennaSetCodebook;
use crate::error::{Error, Result};
use crate::power::SuperposedSymbol;

/// Per-antenna transmit vector of length `m_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitVector {
    pub entries: DVector<Complex64>,
    /// Codebook position of the active set; `None` when every antenna is active.
    pub active_set_index: Option<usize>,
}

impl TransmitVector {
    /// The symbol spread over all `m_t` antennas with amplitude `X / sqrt(m_t)`.
    pub fn broadcast(value: Complex64, m_t: usize) -> Self {
        let v = value / (m_t as f64).sqrt();
        Self {
            entries: DVector::from_element(m_t, v),
            active_set_index: None,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn energy(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            entries: self.entries.map(|e| e * factor),
            active_set_index: self.active_set_index,
        }
    }
}

/// Places `X / sqrt(m_a)` on the antennas of set `set_index`, zero elsewhere.
pub fn build_transmit_vector(
    x: &SuperposedSymbol,
    set_index: usize,
    codebook: &AntennaSetCodebook,
    m_t: usize,
) -> Result<TransmitVector> {
    place_on_set(x.value, set_index, codebook, m_t)
}

pub(crate) fn place_on_set(
    value: Complex64,
    set_index: usize,
    codebook: &AntennaSetCodebook,
    m_t: usize,
) -> Result<TransmitVector> {
    if m_t != codebook.m_t() {
        return Err(Error::DimensionMismatch(format!(
            "codebook built for {} antennas, transmitter has {m_t}",
            codebook.m_t()
        )));
    }
    let set = codebook.set(set_index)?;
    let v = value / (codebook.m_a() as f64).sqrt();
    let mut entries = DVector::from_element(m_t, Complex64::new(0.0, 0.0));
    for &antenna in set {
        entries[antenna - 1] = v;
    }
    Ok(TransmitVector {
        entries,
        active_set_index: Some(set_index),
    })
}
