//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A mathematical-domain violation, e.g. a gamma-function argument at a
    /// numerator pole or a nonpositive fractional order.
    #[error("domain error: {0}")]
    Domain(String),

    /// A value left the representable range of f64. Overflow is always
    /// reported explicitly, never returned as a silent infinity.
    #[error("overflow in {0}")]
    Overflow(String),

    /// An invalid constructor or operation parameter.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A sequence was shorter than the operation requires.
    #[error("sequence too short: need at least {needed} samples, have {have}")]
    TooShort { needed: usize, have: usize },

    /// An index beyond the last admissible grid point.
    #[error("index {index} out of range (limit {limit})")]
    IndexOutOfRange { index: usize, limit: usize },

    /// Shape mismatch between vectors/matrices of a system description.
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    /// A non-finite value surfaced while stepping a trajectory; `step` is the
    /// first grid index at which it occurred.
    #[error("non-finite value in {what} at step {step}")]
    NonFinite { what: &'static str, step: usize },

    /// The truncated series did not reach its tolerance within the term budget.
    #[error("series did not converge at step {step} within {max_terms} terms")]
    SeriesNotConverged { step: usize, max_terms: usize },

    /// A kernel table would exceed the memory budget.
    #[error("kernel table of {requested} entries exceeds the budget of {budget}")]
    TableBudget { requested: usize, budget: usize },
}
