use thiserror::Error;

use crate::conic::SolveStatus;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("{routine} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("cone solver stopped with status {status:?} after {iterations} iterations")]
    Solver {
        status: SolveStatus,
        iterations: usize,
    },

    #[error("stream {stream} carries power with a zero equalizer gain")]
    DeadEqualizer { stream: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable tag, safe for a CSV cell.
    pub fn label(&self) -> String {
        match self {
            Error::InvalidInput(_) => "invalid_input".into(),
            Error::DimensionMismatch(_) => "dimension_mismatch".into(),
            Error::NonFinite => "non_finite".into(),
            Error::NotHermitian(_) => "not_hermitian".into(),
            Error::NoConvergence { routine, .. } => format!("no_convergence_{routine}"),
            Error::Solver { status, .. } => format!("solver_{}", status.as_str()),
            Error::DeadEqualizer { .. } => "dead_equalizer".into(),
            Error::Parse(_) => "parse".into(),
            Error::Io(_) => "io".into(),
        }
    }
}
