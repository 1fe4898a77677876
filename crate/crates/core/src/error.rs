use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid scene, channel, codebook or experiment parameters.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid codebook: {0}")]
    Codebook(String),

    #[error("measured response: {0}")]
    Measured(String),

    /// A lookup table was paired with a codebook it was not built from.
    #[error("quantization table does not match codebook")]
    TableMismatch,

    /// An invariant failed while running a computation.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for errors caused by bad inputs rather than a failed run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::Codebook(_)
                | Error::Measured(_)
                | Error::TableMismatch
                | Error::DimensionMismatch { .. }
                | Error::Csv(_)
        )
    }
}
