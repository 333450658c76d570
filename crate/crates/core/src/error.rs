use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("entry buffer has length {len}, expected {expected}")]
    BadLength { len: usize, expected: usize },

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix must be square (got {rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: max |H - H*| = {defect:e}")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite: most negative eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (relative off-diagonal mass {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("exponent p = {0} is not a positive finite real")]
    InvalidExponent(f64),

    #[error("p = {p} is outside the range {range} required by {rule}")]
    ExponentOutOfRange {
        p: f64,
        range: &'static str,
        rule: &'static str,
    },

    #[error("family does not span: smallest frame-operator eigenvalue {lambda_min:e} (threshold {threshold:e})")]
    NotSpanning { lambda_min: f64, threshold: f64 },

    #[error("could not reach condition target {target} after {attempts} attempts (best {best})")]
    ConditionUnattainable { target: f64, attempts: usize, best: f64 },

    #[error("point {0} is not inside the open unit disk")]
    OutsideDisk(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
