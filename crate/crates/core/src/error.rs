use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("anchor mismatch: weights/problem anchor {expected} vs {actual}")]
    AnchorMismatch { expected: usize, actual: usize },

    #[error("infeasible problem: {0}")]
    Infeasible(String),

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("solver failure: {0}")]
    Solver(String),
}
