use thiserror::Error;

/// Errors produced by the scoring, simulation and ingest layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid quality profile: {0}")]
    InvalidProfile(String),

    #[error("invalid weight scheme: {0}")]
    InvalidWeights(String),

    #[error("FTE staff must be positive and finite, got {0}")]
    InvalidFte(f64),

    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),

    #[error("standard error must be non-negative and finite, got {0}")]
    InvalidStdError(f64),

    #[error("no groups supplied")]
    NoData,

    #[error("at least 2 groups are required, got {0}")]
    TooFewGroups(usize),

    #[error("exact enumeration supports 2..=8 groups, got {0}")]
    EnumerationSize(usize),

    #[error("iterations must be at least 1")]
    NoIterations,

    #[error("expected {expected} rank distributions, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("unreadable header: {0}")]
    Header(String),

    #[error("duplicate submission for institution {institution:?} in unit {unit:?} (row {row})")]
    DuplicateSubmission {
        institution: String,
        unit: String,
        row: usize,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
