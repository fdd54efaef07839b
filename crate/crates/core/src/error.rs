use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {detail}")]
    DimensionMismatch { op: &'static str, detail: String },

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero diagonal entry in row {row}")]
    ZeroDiagonal { row: usize },

    #[error("invalid splitting: F point {row} has off-diagonal couplings but none to a C point")]
    NoCoarseCoupling { row: usize },

    #[error("splitting produced no F points at level {level} (n = {n})")]
    CoarseningStagnated { level: usize, n: usize },

    #[error("polynomial construction failed: {0}")]
    Polynomial(String),

    #[error("solve diverged at iteration {iteration} (residual {residual:e})")]
    Diverged { iteration: usize, residual: f64 },

    #[error("unsupported option: {0}")]
    Unsupported(String),

    #[error("matrix market parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(op: &'static str, detail: impl Into<String>) -> Self {
        Error::DimensionMismatch { op, detail: detail.into() }
    }
}
