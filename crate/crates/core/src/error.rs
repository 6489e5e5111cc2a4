use thiserror::Error;

/// Errors raised by the evaluators, solvers and configuration layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// The gradient density vanished (h is locally a multiple of pi).
    #[error("degenerate state: {0}")]
    Degenerate(String),

    /// The h <-> u change of variables is undefined at some node.
    #[error("transform error at node {node}: {reason}")]
    Transform { node: usize, reason: String },

    /// The stationary shooting integration could not proceed.
    #[error("integration failure at r = {r:.6e}: {reason}")]
    Integration { r: f64, reason: String },

    /// Two traces or profiles were sampled on incompatible grids.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// The comparison family claims to be a subsolution everywhere yet fails at tiny delta.
    #[error("inconsistent subsolution family: {0}")]
    Inconsistent(String),

    #[error("config line {line}: {reason}")]
    ConfigParse { line: usize, reason: String },

    #[error("config key `{key}`: {reason}")]
    ConfigRange { key: String, reason: String },

    #[error("initial datum rejected: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
