use thiserror::Error;

use crate::game::PlayerId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown player {0}")]
    UnknownPlayer(PlayerId),
    #[error("invalid process graph: {0}")]
    InvalidGraph(String),
    #[error("action value {0} outside [0, 1]")]
    ActionOutOfRange(f64),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid objective hierarchy: {0}")]
    Hierarchy(String),
    #[error("interpolation smoothing must be positive, got {0}")]
    InvalidGamma(f64),
    #[error("singular normal equation (rank deficient sample set)")]
    SingularFit,
    #[error("not enough samples for fit: have {have}, need {need}")]
    TooFewSamples { have: usize, need: usize },
    #[error("map file: {0}")]
    MapFormat(String),
    #[error("unsupported map file version {found} (expected {expected})")]
    MapVersion { found: u8, expected: u8 },
    #[error("empty search space")]
    EmptySearchSpace,
    #[error("simulation failed at t={time}s: {reason}")]
    Simulation { time: f64, reason: String },
    #[error("trace line {line}: {reason}")]
    Trace { line: u64, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
