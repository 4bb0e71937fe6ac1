use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point outside the domain: {0}")]
    OutOfDomain(String),

    #[error("kernel requires s > t, got t = {t}, s = {s}")]
    TimeOrdering { t: f64, s: f64 },

    #[error("unsupported derivative order: {0}")]
    UnsupportedOrder(String),

    #[error("unsupported domain shape: {0}")]
    UnsupportedShape(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("linear solve failed at time step {step}: {detail}")]
    SolverFailure { step: usize, detail: String },

    #[error("inconsistent result: {0}")]
    Inconsistency(String),

    #[error("config error on line {line}: {detail}")]
    Config { line: usize, detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
