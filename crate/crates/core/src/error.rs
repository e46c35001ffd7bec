use thiserror::Error;

/// Errors raised by the shaping, coding and file-handling layers.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A received word has a weight that belongs to neither probabilistic range.
    #[error("codeword weight {weight} is outside the admissible weight ranges for n={n}")]
    InvalidWeight { weight: usize, n: usize },

    /// A received word ranks into the unused tail of the codebook.
    #[error("codeword index lies outside the {k}-bit message space")]
    UnusedCodeword { k: usize },

    /// Systematic encoding could not reproduce the data bits.
    #[error("construction error: {0}")]
    Construction(String),

    /// A malformed line in a frame file.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Bad command or configuration.
    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors that the inverse shaper reports on an uncorrected frame.
    pub fn is_frame_error(&self) -> bool {
        matches!(self, Error::InvalidWeight { .. } | Error::UnusedCodeword { .. })
    }
}
