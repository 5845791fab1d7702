use thiserror::Error;

/// Errors raised by estimators, models and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("covariance is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("inconsistent beliefs: both variances are zero with different means ({0} vs {1})")]
    Inconsistent(f64, f64),

    #[error("observation has no inverse at t={t}")]
    NoInverse { t: usize },

    #[error("singular innovation covariance")]
    SingularInnovation,

    #[error("under-determined system: {observations} observation rows for {state_dim} unknowns (rank {rank})")]
    UnderDetermined {
        observations: usize,
        state_dim: usize,
        rank: usize,
    },

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
