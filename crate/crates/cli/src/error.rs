use std::path::PathBuf;

use manna::solvers::SolverError;
use manna::transforms::TransformError;
use manna::verify::VerifyError;
use manna::MarketError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {message}")]
    Shape { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl CliError {
    /// Process exit status: 2 for bad input, 3 when a search gave up.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Solver(
                SolverError::NotFound { .. }
                | SolverError::TooLarge { .. }
                | SolverError::NoPoGridPoint { .. },
            ) => 3,
            _ => 2,
        }
    }
}
