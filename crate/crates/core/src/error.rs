//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Two inputs that must agree on `m` (or on length) do not.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A sequence that should be a permutation (or ordered subset) is not.
    #[error("invalid ranking: {0}")]
    InvalidRanking(String),

    /// An operation would enumerate m! rankings for an m above the guard.
    #[error("m = {m} exceeds exact-enumeration capacity (max {max})")]
    CapacityExceeded { m: usize, max: usize },

    /// A model or configuration parameter is out of range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A checker was called outside the regime it is defined for. Distinct
    /// from the condition evaluating to false: false is a valid answer,
    /// this is "the question is malformed".
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Aggregation over partial rankings could not rank some pair of
    /// alternatives because no ballot subset covers it.
    #[error("incomplete pair coverage: no ballot covers {missing:?}")]
    Coverage { missing: Vec<(usize, usize)> },

    /// Stitching subset-level fits into a full ranking requires every
    /// alternative to appear in at least one subset.
    #[error("alternatives not covered by any subset: {0:?}")]
    UncoveredAlternatives(Vec<usize>),

    /// An input file failed to parse. Always names line and field.
    #[error("parse error at line {line}, field `{field}`: {message}")]
    Parse {
        line: usize,
        field: String,
        message: String,
    },

    /// There is nothing to aggregate / fit / average.
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand used by the parsers.
    pub(crate) fn parse(line: usize, field: &str, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            field: field.to_string(),
            message: message.into(),
        }
    }
}
