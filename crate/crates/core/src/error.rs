//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Tensor shapes don't line up; `layer` names the offending layer.
    #[error("shape mismatch at layer {layer}: {details}")]
    Shape { layer: usize, details: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    /// An input value fell outside its declared domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite gradient entries in layer {layer}")]
    NonFiniteGradient { layer: usize },

    /// An observation with no vehicles cannot be represented; callers must
    /// pad with a virtual vehicle first.
    #[error("observation has no vehicles; pad it with pad_virtual before representing")]
    EmptyVehicleSet,

    /// Training hit a non-finite loss. Carries enough context to diagnose
    /// the blow-up; no retry is attempted.
    #[error(
        "training diverged at iteration {iteration} (lr {lr}): loss {loss}, \
         per-net gradient norms {grad_norms:?}"
    )]
    Diverged {
        iteration: usize,
        lr: f64,
        loss: f64,
        grad_norms: Vec<f64>,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {details}", path.display())]
    FileFormat { path: PathBuf, details: String },

    /// Metric traces that should share an iteration grid don't.
    #[error("inconsistent metric traces: {0}")]
    TraceMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, details: impl Into<String>) -> Self {
        Error::FileFormat {
            path: path.into(),
            details: details.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
