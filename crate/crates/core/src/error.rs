use thiserror::Error;

/// Errors produced by grid construction, assembly, solves and experiment runs.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("multi-index {index:?} is out of range for a grid with {nodes:?} nodes per dimension")]
    OutOfRange { index: Vec<i64>, nodes: Vec<usize> },

    #[error("stencil needs node {missing:?}, which is not available in the grid function")]
    StencilOutOfDomain { missing: Vec<i64> },

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular system ({rows} rows): smallest pivot {min_pivot:.3e}, pivot ratio {pivot_ratio:.3e}, {tiny_pivots} negligible pivot(s)")]
    SingularSystem {
        rows: usize,
        min_pivot: f64,
        pivot_ratio: f64,
        tiny_pivots: usize,
    },

    #[error("fixed-point iteration diverged after {iterations} iterations (residual {residual:.3e}); try a smaller rho")]
    Divergence { iterations: usize, residual: f64 },

    #[error("solver did not converge in stage {stage} after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        stage: usize,
        iterations: usize,
        residual: f64,
    },

    #[error("unsupported analysis: {0}")]
    UnsupportedAnalysis(String),

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error("missing derivative: {0}")]
    MissingDerivative(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
