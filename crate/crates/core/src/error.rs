//! Error type shared across the crate.

use thiserror::Error;

/// Errors raised by parameter validation, scheme construction, and evaluation.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A numeric field is outside its declared range.
    #[error("parameter `{name}` out of range: got {value}, expected {expected}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    /// A model assumption required by the requested operation does not hold.
    #[error("{assumption} assumption violated: {detail}")]
    AssumptionViolated {
        assumption: &'static str,
        detail: String,
    },

    /// The university accepts or rejects every student regardless of signals,
    /// so there is no signaling problem to solve.
    #[error("degenerate regime: the university {action} every student regardless of the signal")]
    DegenerateRegime { action: &'static str },

    /// The caller combined arguments inconsistently.
    #[error("usage error: {0}")]
    Usage(String),

    /// An internal invariant failed; this indicates a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
}
