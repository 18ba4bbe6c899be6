use std::path::PathBuf;

use crate::kinetics::QdState;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid dot state: {0}")]
    InvalidState(String),

    #[error("step requested at t_now = {t_now} ns which is not before t_end = {t_end} ns")]
    TimeOrder { t_now: f64, t_end: f64 },

    #[error("state {0} holds no spin-matched electron-hole pair")]
    NoRadiativePair(QdState),

    #[error("accumulator has seen no cycles")]
    EmptyAccumulator,

    #[error("accumulators with different layouts cannot be merged")]
    LayoutMismatch,

    #[error("maximum lag {max_lag} ns exceeds the trajectory span {span} ns")]
    LagExceedsSpan { max_lag: f64, span: f64 },

    #[error("sink capacity exceeded: {0}")]
    SinkCapacity(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("result log {path}: {reason}")]
    ResultLog { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
