use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the generators, estimators and I/O layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("distance undefined: every trigger stream is empty")]
    UndefinedDistance,

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("metric `{metric}` undefined: {reason}")]
    MetricUndefined { metric: &'static str, reason: String },

    #[error("probability undefined: no record survives d_star_0 < {delta_star}{}", beta.map(|b| format!(" and d_bar > {b}")).unwrap_or_default())]
    UndefinedProbability { delta_star: f64, beta: Option<f64> },

    #[error("enumeration capacity exceeded: {parents} parents, cap is {cap}")]
    Capacity { parents: usize, cap: usize },

    #[error("estimation error: conditioning cell `{cell}` is empty")]
    Estimation { cell: &'static str },

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("configuration invalid:\n{}", .0.join("\n"))]
    Config(Vec<String>),

    #[error("{path}:{line}: {reason}")]
    Format { path: PathBuf, line: usize, reason: String },

    #[error("scores file rejected: {0}")]
    Scores(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
