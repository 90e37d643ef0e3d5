use std::path::PathBuf;

/// Errors produced by the identification toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero delta-rank at delta = {delta:e}: problem is unidentifiable at this tolerance")]
    ZeroDeltaRank { delta: f64 },

    #[error("singular value decomposition did not converge ({rows}x{cols})")]
    SvdNonConvergence { rows: usize, cols: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("lag {lag} out of range for {samples} samples")]
    LagOutOfRange { lag: usize, samples: usize },

    #[error("insufficient samples: need {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },

    #[error("iteration diverged at step {step} (state norm {norm:e})")]
    Divergence { step: usize, norm: f64 },

    #[error("time step {h_t} violates the stability guard h_t <= {limit}")]
    StabilityGuard { h_t: f64, limit: f64 },

    #[error("invalid group representation: {0}")]
    InvalidGroup(String),

    #[error("dictionary error: {0}")]
    Dictionary(String),

    #[error("{path}: row {row}, column {col}: {msg}")]
    Csv {
        path: PathBuf,
        row: usize,
        col: usize,
        msg: String,
    },

    #[error("non-monotone timestamps at index {0}")]
    NonMonotone(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
