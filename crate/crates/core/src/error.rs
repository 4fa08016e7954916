use thiserror::Error;

/// Errors produced by the quaternion algebra, determinant, spectral and ODE routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by a zero quaternion (|q| = {0:e})")]
    DivisionByZero(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("size {size} exceeds the enumeration cap of {cap}")]
    SizeCap { size: usize, cap: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("double determinant has imaginary residue {residue:e} (magnitude {magnitude:e})")]
    ImaginaryResidue { residue: f64, magnitude: f64 },

    #[error("eigenvalue iteration did not converge; partial eigenvalues: {found:?}")]
    NoConvergence { found: Vec<(f64, f64)> },

    #[error("eigenvalue clustering failed: {0}")]
    Clustering(String),

    #[error("{0} is not an eigenvalue of the matrix")]
    NotEigenvalue(String),

    #[error("spectral decomposition is inconsistent: {0}")]
    Decomposition(String),

    #[error("split is not commuting: |DN - ND| = {0:e}")]
    NonCommuting(f64),

    #[error("matrix is not nilpotent: |N^n| = {0:e}")]
    NotNilpotent(f64),

    #[error(
        "coefficient a_{index}(t) does not commute with its integral (|commutator| = {residue:e})"
    )]
    CommutativityViolation { index: usize, residue: f64 },

    #[error("entries do not commute pairwise: {0}")]
    NonCommutingEntries(String),

    #[error("degenerate solution basis: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
