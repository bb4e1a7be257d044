use alloc::{string::String, vec::Vec};

/// Errors raised by the core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of the operation.
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },
    /// The request exceeds a documented size budget.
    #[error("capability error: {what} (limit {limit}, requested {requested})")]
    Capability {
        what: &'static str,
        limit: u64,
        requested: u64,
    },
    /// A caller-side precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(&'static str),
    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    /// Rejection sampling gave up.
    #[error("sampling error: {what} exceeded the budget of {budget} attempts")]
    Sampling { what: &'static str, budget: u64 },
    /// Adaptive quadrature or root refinement failed to converge.
    #[error("numeric error: {0}")]
    Numeric(&'static str),
    /// Cycle statistics needed by `Y` are not available at this size.
    #[error("capability error: cycle statistics unavailable for k = {0:?}")]
    MissingCycles(Vec<usize>),
    /// Malformed matrix fixture text; `line` is 1-based.
    #[error("fixture line {line}: {reason}")]
    Fixture { line: usize, reason: &'static str },
    #[error("invalid kappa {input:?}: {reason}")]
    InvalidKappa { input: String, reason: &'static str },
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
