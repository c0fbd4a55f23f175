//! Error type shared by every module in the crate.

use thiserror::Error;

/// Errors produced by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an operation's precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The Gram matrix of an effective channel is singular or too badly
    /// conditioned to invert reliably.
    #[error("ill-conditioned channel: Gram condition number {condition:e} exceeds {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },

    /// A term of the Jensen lower bound has a nonpositive denominator.
    #[error("lower bound undefined: denominator for user {user} is {denominator:e}")]
    BoundInvalid { user: usize, denominator: f64 },

    /// A request would exceed a configured resource budget.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Experiment configuration is malformed or inconsistent.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
