use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Core(#[from] coharray_core::Error),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl BenchError {
    /// Process exit code for this failure: 1 invalid arguments, 2 solver
    /// failure, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        use coharray_core::Error as Core;
        match self {
            BenchError::InvalidArgument(_) => 1,
            BenchError::Core(Core::Solver(_)) | BenchError::Core(Core::Infeasible(_)) => 2,
            BenchError::Core(_) => 1,
            BenchError::Io(_) | BenchError::Csv(_) => 3,
        }
    }
}
