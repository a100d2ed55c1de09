use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree d = {0} is invalid, d must be at least 3")]
    InvalidDegree(usize),

    #[error("lambda = {lambda} lies outside the spectrum [-{edge}, {edge}]")]
    OutOfSpectrum { lambda: f64, edge: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed vertex address: {0}")]
    MalformedAddress(String),

    #[error("ball of radius {radius} has {size} vertices, over the budget of {budget}")]
    BudgetExceeded { radius: usize, size: u128, budget: usize },

    #[error("covariance profile covers distances up to {available}, distance {requested} required")]
    ProfileTooShort { requested: usize, available: usize },

    #[error("matrix is not a covariance: smallest eigenvalue {0:e}")]
    NotPositiveSemidefinite(f64),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("power iteration did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("rate curve does not cross {target} on [{lo}, {hi}]: r(lo) = {r_lo}, r(hi) = {r_hi}")]
    BracketFailure {
        target: f64,
        lo: f64,
        hi: f64,
        r_lo: f64,
        r_hi: f64,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
