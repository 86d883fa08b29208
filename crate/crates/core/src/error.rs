use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or scenario configuration.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("sampling window [{lo}, {hi}] has acceptance probability {prob:.3e} (< 1e-6)")]
    ImprobableWindow { lo: f64, hi: f64, prob: f64 },

    #[error("need {needed} items with positive weight, only {available} available")]
    InsufficientSupport { needed: usize, available: usize },

    #[error("invalid interval: lo ({lo}) > hi ({hi})")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("comment network has zero total mass")]
    ZeroCommentMass,

    #[error("baseline {metric} is zero at step {step}")]
    ZeroBaseline { metric: String, step: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {msg}")]
    Parse { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True when the error stems from configuration rather than runtime state.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::ImprobableWindow { .. } | Error::Parse { .. } => true,
            Error::AtStep { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
