use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in {0}")]
    NonFiniteInput(&'static str),

    #[error("point is outside the domain: {0}")]
    InfeasiblePoint(String),

    #[error("unsupported pairing: {geometry} geometry over a {set} constraint set")]
    UnsupportedPairing {
        geometry: &'static str,
        set: &'static str,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("all entropic weights underflowed to zero")]
    Underflow,

    #[error("objective is not strongly convex w.r.t. the mirror map (certificate {0:e})")]
    NotStronglyConvex(f64),

    #[error("non-finite iterate at round {round}, node {node}")]
    NonFiniteIterate { round: usize, node: usize },

    #[error("infeasible iterate at round {round}, node {node}")]
    InfeasibleIterate { round: usize, node: usize },

    #[error("rate fit needs at least 4 checkpoints spanning 2 octaves: {0}")]
    InsufficientCheckpoints(String),

    #[error("invalid experiment configuration:\n  - {}", .0.join("\n  - "))]
    InvalidConfig(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    ConfigParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
