//! Scenario description shared by every stage of the link.

use serde::{Deserialize, Serialize};

use crate::codebook::binomial;
use crate::error::{Error, Result};

/// Transmission scheme under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// All users multiplexed in the power domain, symbol sent on every antenna.
    MimoNoma,
    /// Cell-edge users carried by a single active antenna index.
    NomaSsk,
    /// Cell-edge users carried by an index set of `m_a` active antennas.
    NomaGssk,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::MimoNoma => "mimo_noma",
            Scheme::NomaSsk => "noma_ssk",
            Scheme::NomaGssk => "noma_gssk",
        }
    }

    /// True for the schemes that carry cell-edge bits in the antenna index.
    pub fn is_spatial(self) -> bool {
        !matches!(self, Scheme::MimoNoma)
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// How transmit power is booked across power-domain and spatial users.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PowerModel {
    /// One FTPA allocation over all N+K users; spatial schemes radiate and
    /// spend only the share of the N power-domain users.
    #[default]
    SharedAllocation,
    /// FTPA over the N power-domain users only, radiating the full power P.
    FullPower,
}

/// Signal seen by the antenna-set detector of a cell-edge user.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CellEdgeModel {
    /// Active antennas carry a constant-envelope signature of the radiated
    /// power; detection uses the effective-channel hypothesis only.
    #[default]
    ConstantEnvelope,
    /// Active antennas carry the superposed NOMA symbol; the cell-edge user
    /// detects the set jointly with the unknown symbol.
    SuperposedPayload,
}

/// Receive-branch combining used before slicing in SIC.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Combining {
    #[default]
    Mrc,
    /// Only the first receive antenna is used.
    SingleBranch,
}

pub const DEFAULT_FTPA_BETA: f64 = 0.4;
pub const DEFAULT_MIMO_NOMA_TX_ANTENNAS: usize = 2;

/// Full scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub scheme: Scheme,
    pub m_t: usize,
    pub m_a: usize,
    pub m_r: usize,
    pub n_noma: usize,
    pub k_spatial: usize,
    pub total_power: f64,
    pub mod_order: usize,
    pub ftpa_beta: f64,
    /// Per-user RMS channel amplitude, strongest first. Defaults apply when `None`.
    #[serde(default)]
    pub gain_targets: Option<Vec<f64>>,
    #[serde(default)]
    pub power_model: PowerModel,
    #[serde(default)]
    pub cell_edge_model: CellEdgeModel,
    #[serde(default)]
    pub combining: Combining,
}

impl SystemConfig {
    /// NOMA-GSSK with two power-domain users and one cell-edge user.
    pub fn noma_gssk(m_t: usize, m_a: usize) -> Self {
        Self {
            scheme: Scheme::NomaGssk,
            m_t,
            m_a,
            m_r: 4,
            n_noma: 2,
            k_spatial: 1,
            total_power: 1.0,
            mod_order: 4,
            ftpa_beta: DEFAULT_FTPA_BETA,
            gain_targets: None,
            power_model: PowerModel::default(),
            cell_edge_model: CellEdgeModel::default(),
            combining: Combining::default(),
        }
    }

    pub fn noma_ssk(m_t: usize) -> Self {
        Self {
            scheme: Scheme::NomaSsk,
            m_a: 1,
            ..Self::noma_gssk(m_t, 1)
        }
    }

    /// MIMO-NOMA with three power-domain users, the weakest being the cell-edge user.
    pub fn mimo_noma(m_t: usize) -> Self {
        Self {
            scheme: Scheme::MimoNoma,
            m_a: m_t,
            n_noma: 3,
            k_spatial: 0,
            ..Self::noma_gssk(m_t, m_t)
        }
    }

    pub fn total_users(&self) -> usize {
        self.n_noma + self.k_spatial
    }

    /// Number of users treated as cell-edge. MIMO-NOMA has no spatial users,
    /// so its weakest power-domain layer plays that role.
    pub fn edge_users(&self) -> usize {
        if self.scheme.is_spatial() {
            self.k_spatial
        } else {
            1
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.mod_order.trailing_zeros() as usize
    }

    /// Gain targets in effect: explicit ones or the default ladder
    /// (cell-center users 1.0, 0.8, ... down to 0.6; cell-edge users 0.4, 0.3, ...).
    pub fn effective_gain_targets(&self) -> Vec<f64> {
        if let Some(g) = &self.gain_targets {
            return g.clone();
        }
        let total = self.total_users();
        let edges = self.edge_users().min(total);
        let centers = total - edges;
        let mut out = Vec::with_capacity(total);
        let center_step = if centers > 1 {
            (0.4 / (centers - 1) as f64).min(0.2)
        } else {
            0.0
        };
        for i in 0..centers {
            out.push(1.0 - center_step * i as f64);
        }
        let edge_step = if edges > 1 {
            (0.35 / edges as f64).min(0.1)
        } else {
            0.0
        };
        for i in 0..edges {
            out.push(0.4 - edge_step * i as f64);
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.m_t == 0 || self.m_r == 0 || self.n_noma == 0 {
            return bad("m_t, m_r and n_noma must be positive".into());
        }
        if self.m_a == 0 || self.m_a > self.m_t {
            return Err(Error::InvalidAntennaConfig(format!(
                "need 1 <= m_a <= m_t, got m_a={} m_t={}",
                self.m_a, self.m_t
            )));
        }
        if !(self.total_power > 0.0 && self.total_power.is_finite()) {
            return bad(format!("total_power must be > 0, got {}", self.total_power));
        }
        if self.mod_order < 2 || !self.mod_order.is_power_of_two() {
            return Err(Error::UnsupportedOrder(self.mod_order));
        }
        if !(self.ftpa_beta >= 0.0 && self.ftpa_beta.is_finite()) {
            return bad(format!("ftpa_beta must be >= 0, got {}", self.ftpa_beta));
        }
        match self.scheme {
            Scheme::NomaSsk => {
                if self.m_a != 1 || !self.m_t.is_power_of_two() {
                    return Err(Error::InvalidAntennaConfig(format!(
                        "NOMA-SSK needs m_a = 1 and m_t a power of two, got m_a={} m_t={}",
                        self.m_a, self.m_t
                    )));
                }
            }
            Scheme::MimoNoma => {
                if self.k_spatial != 0 {
                    return bad("MIMO-NOMA carries no spatial users (k_spatial must be 0)".into());
                }
                if self.m_a != self.m_t {
                    return bad("MIMO-NOMA transmits on all antennas (m_a must equal m_t)".into());
                }
            }
            Scheme::NomaGssk => {}
        }
        if self.scheme.is_spatial() {
            if self.k_spatial == 0 {
                return bad(format!("{} needs k_spatial >= 1", self.scheme));
            }
            if binomial(self.m_t, self.m_a) < 2 {
                return Err(Error::InvalidAntennaConfig(format!(
                    "C({}, {}) < 2 leaves no spatial bit",
                    self.m_t, self.m_a
                )));
            }
        }
        let gains = self.effective_gain_targets();
        if gains.len() != self.total_users() {
            return Err(Error::InvalidGainTargets(format!(
                "expected {} gain targets, got {}",
                self.total_users(),
                gains.len()
            )));
        }
        Ok(())
    }
}
