use std::path::PathBuf;

use thiserror::Error;

use crate::many_body::ManyBodyState;
use crate::spectral::Field;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("rejected input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("capacity exceeded: {needed} amplitudes requested, limit is {limit}")]
    Capacity { needed: u128, limit: u128 },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("propagation failed at step {step} (t = {time}): {reason}")]
    PropagationFailure {
        step: usize,
        time: f64,
        reason: String,
        last_good: Box<Field>,
    },

    #[error("many-body propagation failed at step {step} (t = {time}): {reason}")]
    ManyBodyFailure {
        step: usize,
        time: f64,
        reason: String,
        last_good: Box<ManyBodyState>,
    },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        residual: f64,
        history: Vec<f64>,
        last: Box<Field>,
    },

    #[error("iteration diverged at step {iteration}: {reason}")]
    Divergence { iteration: usize, reason: String },

    #[error("step-size failure at iteration {iteration}: functional increased by {increase:e}")]
    StepSize { iteration: usize, increase: f64 },

    #[error("eigensolver failure: {0}")]
    Eigen(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("corrupt checkpoint at byte {offset}: {reason}")]
    Checkpoint { offset: usize, reason: String },

    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit status: 2 for configuration and input problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Config(_)
            | Error::Capacity { .. }
            | Error::Io { .. }
            | Error::Checkpoint { .. }
            | Error::Serde(_)
            | Error::Csv(_) => 2,
            _ => 3,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
