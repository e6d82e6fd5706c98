use thiserror::Error;

/// Errors raised by the simulator and the closed-form analysis.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid antenna configuration: {0}")]
    InvalidAntennaConfig(String),
    #[error("degenerate power allocation: {0}")]
    DegenerateAllocation(String),
    #[error("unsupported modulation order {0}")]
    UnsupportedOrder(usize),
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },
    #[error("invalid gain targets: {0}")]
    InvalidGainTargets(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("invalid SNR {0}")]
    InvalidSnr(f64),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("zero spent power")]
    ZeroPower,
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
