use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("matrix is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("evaluation point {x} is too close to the spectrum (largest eigenvalue {lambda_max})")]
    InsideSpectrum { x: f64, lambda_max: f64 },

    #[error("unsupported angle-support configuration: {0}")]
    UnsupportedSupports(String),

    #[error("support too large for exact permutation search: {rows} rows (limit {limit})")]
    SupportTooLarge { rows: usize, limit: usize },

    #[error("no admissible matrix: {0}")]
    Infeasible(String),

    #[error("not estimable: {0}")]
    NotEstimable(String),

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}
