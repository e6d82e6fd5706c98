//! Receivers: ML antenna-set detection for cell-edge users and SIC for
//! power-domain users.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::channel::{effective_channel, UserChannel};
use crate::codebook::AntennaSetCodebook;
use crate::config::Combining;
use crate::error::{Error, Result};
use crate::modulation::Constellation;
use crate::power::PowerAllocation;

/// Outcome of antenna-set detection.
#[derive(Debug, Clone, PartialEq)]
pub struct SetDecision {
    pub set_index: usize,
    pub metric_values: Vec<f64>,
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Effective channels of every codebook entry for one user channel.
#[derive(Debug, Clone)]
pub struct SetDetector {
    effective: Vec<DVector<Complex64>>,
    m_a: usize,
}

impl SetDetector {
    pub fn new(codebook: &AntennaSetCodebook, ch: &UserChannel) -> Result<Self> {
        if codebook.m_t() != ch.m_t() {
            return Err(Error::DimensionMismatch(format!(
                "codebook for {} antennas, channel has {} columns",
                codebook.m_t(),
                ch.m_t()
            )));
        }
        let effective = codebook
            .sets()
            .iter()
            .map(|s| effective_channel(ch, s))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            effective,
            m_a: codebook.m_a(),
        })
    }

    pub fn effective(&self) -> &[DVector<Complex64>] {
        &self.effective
    }

    /// `argmin_j || y - sqrt(snr / m_a) eff_j ||^2` over unit-scaled `y`.
    pub fn detect(&self, y: &DVector<Complex64>, snr_linear: f64) -> Result<SetDecision> {
        let amp = (snr_linear / self.m_a as f64).sqrt();
        let metric_values = self
            .effective
            .iter()
            .map(|eff| {
                if eff.len() != y.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "observation has {} entries, channel has {} rows",
                        y.len(),
                        eff.len()
                    )));
                }
                Ok(y.iter()
                    .zip(eff.iter())
                    .map(|(yi, ei)| (yi - ei * amp).norm_sqr())
                    .sum())
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(SetDecision {
            set_index: argmin(&metric_values),
            metric_values,
        })
    }

    /// Joint detection of the set and an unknown payload drawn from
    /// `payloads`; hypotheses are `payload * eff_j / sqrt(m_a)` over raw `y`.
    /// Returns the set decision (metric minimized over payloads) and the
    /// payload index.
    pub fn detect_joint(&self, y: &DVector<Complex64>, payloads: &[Complex64]) -> Result<(SetDecision, usize)> {
        if payloads.is_empty() {
            return Err(Error::InvalidConfig("no payload hypotheses".into()));
        }
        let scale = (self.m_a as f64).sqrt().recip();
        let y_energy: f64 = y.iter().map(|v| v.norm_sqr()).sum();
        let mut metric_values = Vec::with_capacity(self.effective.len());
        let mut best_payload = Vec::with_capacity(self.effective.len());
        for eff in &self.effective {
            if eff.len() != y.len() {
                return Err(Error::DimensionMismatch(format!(
                    "observation has {} entries, channel has {} rows",
                    y.len(),
                    eff.len()
                )));
            }
            let gain: f64 = eff.iter().map(|e| e.norm_sqr()).sum::<f64>() * scale * scale;
            let corr: Complex64 = eff.iter().zip(y.iter()).map(|(e, v)| e.conj() * v).sum::<Complex64>() * scale;
            // || y - h X ||^2 = ||y||^2 - |h^H y|^2 / |h|^2 + |h|^2 |X - h^H y / |h|^2|^2
            let (idx, metric) = if gain > 0.0 {
                let z = corr / gain;
                let idx = nearest_point(payloads, z);
                (idx, y_energy - corr.norm_sqr() / gain + gain * (payloads[idx] - z).norm_sqr())
            } else {
                (0, y_energy)
            };
            metric_values.push(metric);
            best_payload.push(idx);
        }
        let set_index = argmin(&metric_values);
        Ok((
            SetDecision {
                set_index,
                metric_values,
            },
            best_payload[set_index],
        ))
    }
}

fn nearest_point(points: &[Complex64], z: Complex64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in points.iter().enumerate() {
        let d = (z - p).norm_sqr();
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Cell-edge ML antenna-set detector. `y` is expressed in unit-scaled form
/// (see [`crate::channel::NoiseSpec::unit_scale`]) so that set `j` appears as
/// `sqrt(snr / m_a) eff_j`. Ties go to the lowest index.
pub fn ml_antenna_set_detect(
    y: &DVector<Complex64>,
    codebook: &AntennaSetCodebook,
    ch: &UserChannel,
    snr_linear: f64,
) -> Result<SetDecision> {
    if y.len() != ch.m_r() {
        return Err(Error::DimensionMismatch(format!(
            "observation has {} entries, channel has {} rows",
            y.len(),
            ch.m_r()
        )));
    }
    SetDetector::new(codebook, ch)?.detect(y, snr_linear)
}

/// Label bits of the decided set.
pub fn demap_set_to_bits(decision: &SetDecision, codebook: &AntennaSetCodebook) -> Result<Vec<u8>> {
    codebook.label(decision.set_index)
}

/// Record of one SIC pass.
#[derive(Debug, Clone, PartialEq)]
pub struct SicTrace {
    /// Decided points, in decode order (largest power fraction first), own layer last.
    pub detected_symbols: Vec<Complex64>,
    /// Constellation labels matching `detected_symbols`.
    pub detected_labels: Vec<usize>,
    /// Observation after each cancelled layer.
    pub residuals: Vec<DVector<Complex64>>,
    pub own_symbol: Complex64,
    pub own_label: usize,
}

const MAX_SUPERPOSED_POINTS: usize = 1 << 20;

/// Precomputed superposed constellations for a SIC receiver.
///
/// Layer `l` (1-based, ascending power fraction) is detected by finding the
/// nearest point of the superposition of layers `1..=l` and keeping its
/// layer-`l` component.
#[derive(Debug, Clone)]
pub struct SicDetector {
    constellation: Constellation,
    amplitudes: Vec<f64>,
    /// For each prefix length `l`, (superposed value, label of layer `l`).
    prefix_tables: Vec<Vec<(Complex64, usize)>>,
    combining: Combining,
}

impl SicDetector {
    pub fn new(alloc: &PowerAllocation, total_power: f64, mod_order: usize, combining: Combining) -> Result<Self> {
        let constellation = Constellation::new(mod_order)?;
        let amplitudes: Vec<f64> = alloc.alphas().iter().map(|a| (a * total_power).sqrt()).collect();
        let m = constellation.order();
        let n = amplitudes.len();
        let total = (1..=n as u32).try_fold(0usize, |acc, l| m.checked_pow(l).map(|p| acc + p));
        if total.is_none_or(|t| t > MAX_SUPERPOSED_POINTS) {
            return Err(Error::InvalidConfig(format!(
                "superposed constellation of {n} layers at order {m} is too large"
            )));
        }
        let mut prefix_tables = Vec::with_capacity(n);
        let mut sums: Vec<Complex64> = vec![Complex64::new(0.0, 0.0)];
        for amp in &amplitudes {
            let mut table = Vec::with_capacity(sums.len() * m);
            let mut next = Vec::with_capacity(sums.len() * m);
            for s in &sums {
                for (label, p) in constellation.points().iter().enumerate() {
                    let v = s + p * amp;
                    table.push((v, label));
                    next.push(v);
                }
            }
            prefix_tables.push(table);
            sums = next;
        }
        Ok(Self {
            constellation,
            amplitudes,
            prefix_tables,
            combining,
        })
    }

    pub fn layers(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    /// Every superposed point of all layers.
    pub fn superposed_points(&self) -> Vec<Complex64> {
        self.prefix_tables
            .last()
            .map(|t| t.iter().map(|(v, _)| *v).collect())
            .unwrap_or_default()
    }

    fn combine(&self, y: &DVector<Complex64>, h: &DVector<Complex64>) -> Complex64 {
        match self.combining {
            Combining::Mrc => {
                let gain: f64 = h.iter().map(|v| v.norm_sqr()).sum();
                if gain == 0.0 {
                    return Complex64::new(0.0, 0.0);
                }
                h.iter().zip(y.iter()).map(|(hi, yi)| hi.conj() * yi).sum::<Complex64>() / gain
            }
            Combining::SingleBranch => {
                if h[0].norm_sqr() == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    y[0] / h[0]
                }
            }
        }
    }

    fn detect_layer(&self, z: Complex64, layer: usize) -> usize {
        let table = &self.prefix_tables[layer - 1];
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, (v, _)) in table.iter().enumerate() {
            let d = (z - v).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        table[best].1
    }

    /// Runs SIC for the user at `user_rank` (1 = smallest power fraction).
    pub fn detect(&self, y: &DVector<Complex64>, h: &DVector<Complex64>, user_rank: usize) -> Result<SicTrace> {
        let n = self.layers();
        if user_rank == 0 || user_rank > n {
            return Err(Error::RankOutOfRange { rank: user_rank, max: n });
        }
        if y.len() != h.len() {
            return Err(Error::DimensionMismatch(format!(
                "observation has {} entries, channel has {}",
                y.len(),
                h.len()
            )));
        }
        let mut residual = y.clone();
        let mut detected_symbols = Vec::with_capacity(n - user_rank + 1);
        let mut detected_labels = Vec::with_capacity(n - user_rank + 1);
        let mut residuals = Vec::with_capacity(n - user_rank);
        for layer in (user_rank + 1..=n).rev() {
            let z = self.combine(&residual, h);
            let label = self.detect_layer(z, layer);
            let x = self.constellation.point(label);
            residual -= h * (x * self.amplitudes[layer - 1]);
            detected_symbols.push(x);
            detected_labels.push(label);
            residuals.push(residual.clone());
        }
        let z = self.combine(&residual, h);
        let own_label = self.detect_layer(z, user_rank);
        let own_symbol = self.constellation.point(own_label);
        detected_symbols.push(own_symbol);
        detected_labels.push(own_label);
        Ok(SicTrace {
            detected_symbols,
            detected_labels,
            residuals,
            own_symbol,
            own_label,
        })
    }
}

/// SIC detection of the user at `user_rank` from observation `y` through the
/// effective channel `h` shared by every superposed layer.
pub fn sic_detect(
    y: &DVector<Complex64>,
    h: &DVector<Complex64>,
    user_rank: usize,
    alloc: &PowerAllocation,
    total_power: f64,
    mod_order: usize,
) -> Result<SicTrace> {
    SicDetector::new(alloc, total_power, mod_order, Combining::Mrc)?.detect(y, h, user_rank)
}
