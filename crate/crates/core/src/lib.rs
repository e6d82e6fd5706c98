//! Link-level simulation and closed-form analysis of downlink NOMA combined
//! with generalized space shift keying (NOMA-GSSK), alongside the NOMA-SSK and
//! MIMO-NOMA baselines.
//!
//! Power-domain users are superposed with FTPA power fractions and decoded by
//! SIC; cell-edge users are carried by the choice of active transmit antenna
//! set and decoded by an ML set detector.

pub mod analysis;
pub mod channel;
pub mod codebook;
pub mod config;
pub mod error;
pub mod modulation;
pub mod montecarlo;
pub mod output;
pub mod power;
pub mod receivers;
pub mod scenario;
pub mod transmit;

pub use codebook::{build_codebook, map_bits_to_set, AntennaSetCodebook};
pub use config::{CellEdgeModel, Combining, PowerModel, Scheme, SystemConfig};
pub use error::{Error, Result};
pub use montecarlo::{Metric, SweepResult, SweepSpec};
