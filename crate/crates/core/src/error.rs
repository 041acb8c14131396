use thiserror::Error;

/// Errors raised by the numeric core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Two curves or samples do not share a grid.
    #[error("grid mismatch: expected {expected} points, found {found}")]
    GridMismatch { expected: usize, found: usize },

    /// Paired samples or series of different lengths.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// Empty sample or curve.
    #[error("empty input: {0}")]
    Empty(String),

    /// An integer parameter (usually `k`) outside its admissible range.
    #[error("out of range: {0}")]
    Range(String),

    /// A real parameter or datum outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The upper tail carries no information (all log-spacings zero,
    /// too few distinct values, ...).
    #[error("degenerate tail: {0}")]
    DegenerateTail(String),

    /// The exceedance set cannot support the estimator (zero threshold,
    /// a margin identically zero on the exceedances, ...).
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

impl Error {
    /// True for errors that describe the data rather than the caller's
    /// arguments.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::DegenerateTail(_) | Error::DegenerateSample(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
