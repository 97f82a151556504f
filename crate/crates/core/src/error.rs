use std::path::PathBuf;

use thiserror::Error;

/// Failures while reading, resolving or validating a run configuration.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed configuration: {0}")]
    Parse(String),
    #[error("invalid {field}: {reason}")]
    Validation { field: String, reason: String },
    #[error("bad unit for {field}: {reason}")]
    Unit { field: String, reason: String },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
}

impl ConfigError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Numerical and domain failures raised by the model itself.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("reaction rate sum is zero; flux reduction coefficient is undefined")]
    DegenerateRates,
    #[error("{what} out of domain: {detail}")]
    OutOfDomain { what: &'static str, detail: String },
    #[error("{what}: root not bracketed on [{lo:e}, {hi:e}] (f = {f_lo:e}, {f_hi:e})")]
    NotBracketed {
        what: &'static str,
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("{what}: no convergence after {iterations} iterations, bracket [{lo:e}, {hi:e}]")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        lo: f64,
        hi: f64,
    },
    #[error(
        "transport step of {step:e} m too coarse: k_f changed by {change:e} (limit {limit:e})"
    )]
    StepTooCoarse { step: f64, change: f64, limit: f64 },
    #[error("cracked-set iteration did not settle after {sweeps} sweeps")]
    CrackedSetCycle { sweeps: usize },
}

/// Calibration dataset and fitting failures.
#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {reason}")]
    Schema { line: usize, reason: String },
    #[error("dataset contains no records")]
    Empty,
}
