use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("quantile at level {level} is not finite")]
    UnboundedQuantile { level: f64 },

    #[error("size {value} exceeds the supported limit {limit} for {what}")]
    Limit { what: &'static str, value: usize, limit: usize },

    #[error("fixed point did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence { iterations: usize, residual: f64, last_re: f64, last_im: f64 },

    #[error("grid point {index} (x = {x}): {source}")]
    GridPoint {
        index: usize,
        x: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("density value {value:e} at x = {x} is negative beyond roundoff")]
    NegativeDensity { x: f64, value: f64 },

    #[error("invalid spectral density: {0}")]
    InvalidDensity(String),

    #[error("circulant embedding has spectrum value {value:e} below zero")]
    Embedding { value: f64 },

    #[error("eigenvalue iteration failed to converge at index {index}")]
    EigenNonConvergence { index: usize },

    #[error("io: {0}")]
    Io(String),

    #[error("serialization: {0}")]
    Serde(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
