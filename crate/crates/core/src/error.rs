use std::path::PathBuf;

/// Errors produced by the sensing, recovery, simulation and experiment layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("cannot place {count} disjoint pulses of side {side} on a {n1}x{n2} grid after {attempts} attempts")]
    PlacementInfeasible {
        count: usize,
        side: usize,
        n1: usize,
        n2: usize,
        attempts: usize,
    },

    #[error("unsupported angle: {0}")]
    UnsupportedAngle(String),

    #[error("least-squares solve failed on a support of {support} columns")]
    IllPosedSupport { support: usize },

    #[error("grid dimensions must be odd, got {n1}x{n2}")]
    EvenGrid { n1: usize, n2: usize },

    #[error("schedule/matrix mismatch: {0}")]
    ScheduleMismatch(String),

    #[error("bandwidth {bandwidth} b/s is below the minimum {minimum} b/s for q_s = {q_s}")]
    InfeasibleBandwidth {
        q_s: f64,
        bandwidth: f64,
        minimum: f64,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("missing config fields: {}", .0.join(", "))]
    MissingFields(Vec<String>),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
