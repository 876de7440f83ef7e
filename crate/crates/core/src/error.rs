use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("matrix is not symmetric (max |M - M^T| = {0:.3e})")]
    NotSymmetric(f64),

    #[error("{what}: residual {residual:.3e} exceeds bound {bound:.3e}")]
    ResidualExceeded {
        what: String,
        residual: f64,
        bound: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invariant violated in {stage}: {identity}")]
    InvariantViolated { stage: String, identity: String },

    #[error("projector is not idempotent")]
    NotIdempotent,

    #[error("algebra closure exceeded the basis cap of {cap}; try a smaller graph")]
    DimensionCap { cap: usize },

    #[error("module splitting retries exhausted: {0}")]
    RetriesExhausted(String),

    #[error("graph is disconnected (vertex {0} unreachable from 0)")]
    Disconnected(usize),

    #[error("adjacency spectrum has a repeated eigenvalue; upstream construction is broken")]
    RepeatedEigenvalue,

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Exit-code class for the CLI: 1 = verification failure,
    /// 2 = usage/config error, 3 = internal guard tripped.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_) => 2,
            Error::DimensionCap { .. } | Error::RetriesExhausted(_) => 3,
            _ => 1,
        }
    }
}
