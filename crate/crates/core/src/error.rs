use std::io;

use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain where the mathematics is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("adaptive quadrature did not converge: {0}")]
    Quadrature(String),

    /// The certified error budget of a rate evaluation exceeded the caller's cap.
    #[error("error budget {budget:.3e} exceeds cap {cap:.3e}")]
    Budget { budget: f64, cap: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("time step {dt:.3e} exceeds the stability bound {bound:.3e}")]
    Stability { dt: f64, bound: f64 },

    /// A lemma's input configuration violates its hypotheses.
    #[error("invalid configuration: {0}")]
    Configuration(String),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    #[error("config parse error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
