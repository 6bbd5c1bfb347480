//! Complex vector/matrix primitives and the Hermitian eigensolver.

mod eigen;
mod matrix;
mod vector;

pub use eigen::{
    dominant_eigenvectors, eigen_residual, hermitian_eigen, residual_tolerance, EigenDecomposition,
};
pub use matrix::{CMatrix, HermitianMatrix};
pub use vector::{hermitian_inner, squared_norm, CVector};

pub(crate) use vector::inner_slices;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("empty vector or matrix")]
    Empty,
    #[error("non-finite entry at position {index}")]
    NonFinite { index: usize },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {max_deviation:e})")]
    NotHermitian { max_deviation: f64 },
    #[error("requested {requested} eigenvectors of a {dim}-dimensional matrix")]
    RankTooLarge { requested: usize, dim: usize },
    #[error("eigensolver did not converge after {iterations} sweeps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
}
