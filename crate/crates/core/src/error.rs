use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not full rank (rank {rank} < {expected})")]
    Rank { rank: usize, expected: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("sublattice containment failed: {0}")]
    Containment(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("insufficient precision: need {required} bits, have {available}")]
    Precision { required: u32, available: u32 },

    /// Interval evaluation lost too much precision; retry with at least `bits`.
    #[error("precision escalation required: retry with at least {bits} bits")]
    PrecisionEscalation { bits: u32 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("insufficient samples: generated rank {rank} < {needed}")]
    InsufficientSamples { rank: usize, needed: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
