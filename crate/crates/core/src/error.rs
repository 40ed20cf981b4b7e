use thiserror::Error;

/// Errors raised by the solver stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("matrix is singular: zero pivot in column {column}")]
    Singular { column: usize },

    #[error("trajectory diverged at horizon step {step} ({what})")]
    Diverged { what: &'static str, step: usize },

    #[error("operator application failed for column {column}: {source}")]
    Column {
        column: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("preconditioner is not positive definite (r^T T r = {value:e})")]
    IndefinitePreconditioner { value: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
