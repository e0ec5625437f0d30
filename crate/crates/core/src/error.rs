use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("dimension mismatch: expected a vector of length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid pump: {0}")]
    InvalidPump(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("step size underflow at tau = {last_good_tau} (h = {step:e})")]
    StepSizeUnderflow { last_good_tau: f64, step: f64 },
    #[error("non-finite amplitudes after tau = {last_good_tau}")]
    NonFinite { last_good_tau: f64 },
    #[error(
        "no conversion peak found for n = {n} up to tau = {tau_hi} after {doublings} window doublings \
         ({evaluations} evaluations)"
    )]
    PeakNotFound { n: usize, tau_hi: f64, doublings: u32, evaluations: usize },
    #[error("invalid search configuration: {0}")]
    InvalidSearch(String),
}

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("dense oracle refuses n = {n} (limit {limit})")]
    TooLarge { n: usize, limit: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum EnsembleError {
    #[error("invalid ensemble configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed content: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("refusing to write {path}: pair distribution sums to {sum}")]
    NotNormalized { path: PathBuf, sum: f64 },
    #[error("refusing to write an empty table to {0}")]
    EmptyTable(PathBuf),
    #[error("table rows must be sorted by n ({path})")]
    Unsorted { path: PathBuf },
    #[error("{path}: manifest encoding failed: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

impl IoError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        IoError::Io { path: path.into(), source }
    }
}
