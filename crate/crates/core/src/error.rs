//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by document parsing, model validation, the network
/// calculus engine, and the optimizer drivers.
///
/// Admission *rejections* are not errors; they are reported through
/// [`crate::admission::AdmissionDecision`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error(
        "instability: arrival rate {arrival_bps} bit/s exceeds service rate {service_bps} bit/s"
    )]
    Instability { arrival_bps: f64, service_bps: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("no path from {from} to {to}")]
    NoPath { from: String, to: String },

    #[error("unknown flow {0}")]
    UnknownFlow(String),

    #[error("flow {0} is already admitted")]
    DuplicateFlow(String),

    #[error("intractable: {0}")]
    Intractable(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
