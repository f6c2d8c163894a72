use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("shape mismatch: header declares {expected} values, payload has {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("non-finite value at cell {0}")]
    NonFinite(usize),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("quadrature truncation error {estimate:e} exceeds tolerance {tolerance:e}")]
    Truncation { estimate: f64, tolerance: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Domain(_) => "domain",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::MalformedHeader(_) => "malformed_header",
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::InvalidKernel(_) => "invalid_kernel",
            Error::Truncation { .. } => "truncation",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Unsupported(_) => "unsupported",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
