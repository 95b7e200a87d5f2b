//! Complex scalars and small dense complex matrices.

mod eigen;
mod expm;
mod matrix;

pub use eigen::{eigenvalues, Spectrum};
pub use expm::{exp_two_pi_i, mat_exp, mat_log_principal};
pub use matrix::{Complex, ComplexMatrix, ScalarCheck, MAX_DIM, SINGULARITY_FLOOR};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix dimension {0} outside 1..={MAX_DIM}")]
    InvalidDimension(usize),
    #[error("matrix is not square ({rows} rows, row of length {cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("non-finite entry")]
    NonFinite,
    #[error("singular matrix (|det| = {det_abs:e})")]
    Singular { det_abs: f64 },
    #[error("eigenvalue iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("eigenvalue {eigenvalue} lies on the principal-log branch cut")]
    BranchCut { eigenvalue: Complex },
    #[error("overflow in matrix exponential")]
    Overflow,
}

/// Matrix product; see [`ComplexMatrix::mat_mul`].
pub fn mat_mul(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    a.mat_mul(b)
}

/// `(is_scalar, trace/n)` with tolerance relative to ‖m‖_∞.
pub fn is_scalar(m: &ComplexMatrix, tol: f64) -> (bool, Complex) {
    let check = m.is_scalar(tol);
    (check.is_scalar, check.value)
}
