use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("input contains no records")]
    EmptyInput,

    #[error("self-loop on zone {0}")]
    SelfLoop(String),

    #[error("edge {from} -> {to} has non-positive weight {weight}")]
    NonPositiveWeight { from: String, to: String, weight: f64 },

    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: String, to: String },

    #[error("unknown zone {0}")]
    UnknownZone(String),

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("zone {0} has zero out-weight; restrict the graph to a strong component first")]
    DanglingVertex(String),

    #[error("row {row} of the transition matrix is not stochastic: {reason}")]
    NotStochastic { row: usize, reason: String },

    #[error("transition matrix is reducible: {0}")]
    Reducible(String),

    #[error("stationary solve failed: {0}")]
    Singular(String),

    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("p-value {0} is outside (0, 1]")]
    InvalidPValue(f64),

    #[error("regression undefined: {0}")]
    Regression(String),

    #[error("null sample file: {0}")]
    NullFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
