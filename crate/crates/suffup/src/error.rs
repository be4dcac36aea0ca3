//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong while loading data or running the test.
///
/// Variants are deliberately specific so the CLI can map them onto its
/// exit-code contract (usage vs. data vs. output errors) without string
/// matching.
#[derive(Debug, Error)]
pub enum Error {
    /// A CSV record could not be parsed (wrong column count, bad number, ...).
    #[error("malformed row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },

    /// Observation times must be finite and strictly positive.
    #[error("non-positive or non-finite time {value} at line {line}")]
    NonPositiveTime { line: u64, value: f64 },

    /// The status column accepts only `0` (censored) and `1` (event).
    #[error("unknown status {token:?} at line {line} (expected 0 or 1)")]
    UnknownStatus { line: u64, token: String },

    /// A sample must contain at least one observation.
    #[error("empty sample: no observations")]
    EmptySample,

    /// An operation required at least one event time and the sample had none.
    ///
    /// The display text is part of the CLI contract.
    #[error("no uncensored observations")]
    MissingEventTime,

    /// The extrapolation denominator 2b - a - c vanished where a defined
    /// value was required (asymptotic diagnostics only; the estimators
    /// themselves clamp instead).
    #[error("degenerate denominator: 2b - a - c = 0 at the evaluation window")]
    DegenerateDenominator,

    /// A caller-supplied numeric parameter was out of its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Underlying I/O failure (file access, stream read/write).
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Convenience constructor for [`Error::InvalidParameter`].
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
