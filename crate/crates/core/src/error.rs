use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dim { expected: usize, got: usize },

    #[error("invalid dimension: {0}")]
    BadDim(String),

    #[error("non-finite value encountered: {0}")]
    Domain(String),

    #[error("degree error: {0}")]
    Degree(String),

    /// `time` is where the state stopped being finite, `last_good` the last finite sample.
    #[error("integration blew up at t = {time} (last finite state at t = {last_good})")]
    Blowup { time: f64, last_good: f64 },

    #[error("precondition violated at probe {probe}: {reason}")]
    Precondition { probe: usize, reason: String },

    #[error("invalid argument: {0}")]
    Arg(String),

    #[error("unknown system `{0}`")]
    Lookup(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("singular configuration: {0}")]
    Singular(String),

    #[error("chart singularity: denominator {denominator:e} below threshold")]
    ChartSingular { denominator: f64 },

    #[error("shape error: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dim { expected, got })
    }
}
