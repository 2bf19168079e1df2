use thiserror::Error;

/// Errors raised by model construction and the scale-function machinery.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("p_0 must be strictly positive (got {0})")]
    NonPositiveP0(f64),

    #[error("not a probability distribution: {0}")]
    NotADistribution(String),

    #[error("could not parse probability {0:?}")]
    Parse(String),

    #[error("argument outside its domain: {0}")]
    Domain(String),

    #[error("operation requires a modified geometric claim distribution")]
    WrongKind,

    #[error("scale function overflowed at x = {x}; rebuild the table in rescaled mode")]
    Overflow { x: usize },

    #[error("claim distribution has infinite mean")]
    InfiniteMean,

    #[error("index {index} lies beyond the table (x_max = {x_max})")]
    OutOfTable { index: i64, x_max: usize },

    #[error("limit did not converge: {0}")]
    NoConvergence(String),

    #[error("degenerate model: {0}")]
    Degenerate(String),

    #[error("invalid functional for policy: {0}")]
    InvalidFunctional(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
