//! Fractional transmit power allocation and superposition coding.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::{PowerModel, SystemConfig};
use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

/// Per-user power fractions, user 1 (strongest channel) first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    alphas: Vec<f64>,
}

impl PowerAllocation {
    /// Validates strict ordering `alpha_1 < ... < alpha_N` and unit sum.
    pub fn new(alphas: Vec<f64>) -> Result<Self> {
        Self::with_ordering(alphas, true)
    }

    /// As [`PowerAllocation::new`], with strict ordering optional.
    pub fn with_ordering(alphas: Vec<f64>, strict: bool) -> Result<Self> {
        if alphas.is_empty() {
            return Err(Error::DegenerateAllocation("no users".into()));
        }
        if alphas.iter().any(|&a| !(a > 0.0 && a <= 1.0)) {
            return Err(Error::DegenerateAllocation(format!(
                "fractions must lie in (0, 1]: {alphas:?}"
            )));
        }
        let sum: f64 = alphas.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::DegenerateAllocation(format!("fractions sum to {sum}")));
        }
        let ordered = alphas
            .windows(2)
            .all(|w| if strict { w[0] < w[1] } else { w[0] <= w[1] });
        if !ordered {
            return Err(Error::DegenerateAllocation(format!(
                "fractions not increasing: {alphas:?}"
            )));
        }
        Ok(Self { alphas })
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    /// Fractions of the first `n` users rescaled to sum to one, with the share they held.
    pub fn leading(&self, n: usize) -> Result<(PowerAllocation, f64)> {
        if n == 0 || n > self.len() {
            return Err(Error::IndexOutOfRange {
                index: n,
                limit: self.len(),
            });
        }
        let share: f64 = self.alphas[..n].iter().sum();
        let mut scaled: Vec<f64> = self.alphas[..n].iter().map(|a| a / share).collect();
        // absorb rounding so the unit-sum check holds
        let drift: f64 = 1.0 - scaled.iter().sum::<f64>();
        if let Some(last) = scaled.last_mut() {
            *last += drift;
        }
        let strict = self.alphas.windows(2).all(|w| w[0] < w[1]);
        Ok((PowerAllocation::with_ordering(scaled, strict)?, share))
    }
}

/// `alpha_i = g_i^-beta / sum_j g_j^-beta` with strict ordering enforced.
pub fn ftpa_allocate(channel_power_gains: &[f64], beta: f64) -> Result<PowerAllocation> {
    ftpa_allocate_with(channel_power_gains, beta, true)
}

pub fn ftpa_allocate_with(channel_power_gains: &[f64], beta: f64, strict: bool) -> Result<PowerAllocation> {
    if channel_power_gains.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
        return Err(Error::DegenerateAllocation(format!(
            "channel power gains must be positive: {channel_power_gains:?}"
        )));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::DegenerateAllocation(format!("beta must be >= 0, got {beta}")));
    }
    let weights: Vec<f64> = channel_power_gains.iter().map(|g| g.powf(-beta)).collect();
    let total: f64 = weights.iter().sum();
    let mut alphas: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let drift: f64 = 1.0 - alphas.iter().sum::<f64>();
    if let Some(last) = alphas.last_mut() {
        *last += drift;
    }
    PowerAllocation::with_ordering(alphas, strict)
}

/// Superposed NOMA symbol with its constituents.
#[derive(Debug, Clone, PartialEq)]
pub struct SuperposedSymbol {
    pub value: Complex64,
    pub constituents: Vec<Complex64>,
}

/// `X = sum_i sqrt(alpha_i P) x_i`.
pub fn superpose(symbols: &[Complex64], alloc: &PowerAllocation, total_power: f64) -> Result<SuperposedSymbol> {
    if symbols.len() != alloc.len() {
        return Err(Error::LengthMismatch {
            expected: alloc.len(),
            got: symbols.len(),
        });
    }
    let value = symbols
        .iter()
        .zip(alloc.alphas())
        .map(|(x, a)| x * (a * total_power).sqrt())
        .sum();
    Ok(SuperposedSymbol {
        value,
        constituents: symbols.to_vec(),
    })
}

/// Resolved power budget of one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerPlan {
    /// Allocation over the power-domain layers (sums to one).
    pub layers: PowerAllocation,
    /// Power actually radiated, which is also the power booked for energy efficiency.
    pub radiated_power: f64,
    /// FTPA fractions over every user the allocation was computed for.
    pub full_alphas: Vec<f64>,
}

impl PowerPlan {
    pub fn for_config(config: &SystemConfig) -> Result<Self> {
        let gains: Vec<f64> = config
            .effective_gain_targets()
            .iter()
            .map(|g| g * g)
            .collect();
        let n = config.n_noma;
        match config.power_model {
            PowerModel::SharedAllocation => {
                let full = ftpa_allocate(&gains, config.ftpa_beta)?;
                let (layers, share) = full.leading(n)?;
                Ok(Self {
                    layers,
                    radiated_power: share * config.total_power,
                    full_alphas: full.alphas().to_vec(),
                })
            }
            PowerModel::FullPower => {
                let layers = ftpa_allocate(&gains[..n], config.ftpa_beta)?;
                Ok(Self {
                    full_alphas: layers.alphas().to_vec(),
                    layers,
                    radiated_power: config.total_power,
                })
            }
        }
    }

    /// Amplitude `sqrt(alpha_i * P_radiated)` of each layer.
    pub fn layer_amplitudes(&self) -> Vec<f64> {
        self.layers
            .alphas()
            .iter()
            .map(|a| (a * self.radiated_power).sqrt())
            .collect()
    }
}

/// Power fractions booked for energy efficiency: the power-domain users'
/// shares of the allocation in effect.
pub fn energy_spent_alphas(config: &SystemConfig, plan: &PowerPlan) -> Vec<f64> {
    match config.power_model {
        PowerModel::SharedAllocation => plan.full_alphas[..config.n_noma].to_vec(),
        PowerModel::FullPower => plan.layers.alphas().to_vec(),
    }
}
