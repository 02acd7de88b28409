use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solver, the analysis toolkit and the experiment runner.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid grid, truncation, step size or experiment settings.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violating a representation invariant (e.g. Hermitian symmetry).
    #[error("data error: {0}")]
    Data(String),

    /// Index outside the admissible range.
    #[error("range error: {0}")]
    Range(String),

    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Operation precondition not met by the caller.
    #[error("contract error: {0}")]
    Contract(String),

    /// Picard iteration hit its iteration cap.
    #[error("picard iteration did not converge after {iterations} iterations (last relative change {last_change:e}, residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        last_change: f64,
        residual: f64,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error on {}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
