use thiserror::Error;

use crate::oracle::OracleSolution;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("self-loop on node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("node index {index} out of range for {n_nodes} nodes")]
    IndexOutOfRange { index: usize, n_nodes: usize },

    #[error("{requested} edges requested but a simple graph on {n_nodes} nodes has at most {max}")]
    TooManyEdges {
        requested: usize,
        n_nodes: usize,
        max: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid sparsity: {n_zeros} zero coordinates requested for dimension {dim}")]
    InvalidSparsity { n_zeros: usize, dim: usize },

    #[error("matrix is not positive definite")]
    SingularMatrix,

    #[error("rank-one F update requires lambda = 1, got {0}")]
    PreconditionLambda(f64),

    #[error("partitioned inverse does not exist: {0} block is singular")]
    SingularBlock(&'static str),

    #[error("error recursion is not contractive (spectral norm {sigma_norm} >= 1)")]
    NotContractive { sigma_norm: f64 },

    #[error("oracle did not reach tolerance after {} iterations (residual {})", .0.iterations, .0.residual)]
    MaxIterExceeded(Box<OracleSolution>),

    #[error("relative error undefined: true weight vector is zero")]
    ZeroTruth,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
