//! Sparse matrices, block systems, direct and iterative solvers, and
//! extremal generalized eigenvalues.

mod block;
mod csr;
mod direct;
mod eigen;
mod iterative;

use thiserror::Error;

pub use block::BlockSystem;
pub use csr::{assemble_parallel, dot, norm2, CsrMatrix, TripletBuilder};
pub use direct::{solve_direct, LuFactorization};
pub use eigen::{dominant_inverse_gevp, smallest_nonzero_gevp, EigenOptions, EigenPair};
pub use iterative::{solve_iterative, Ilu0, IterativeOptions, Preconditioner};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular matrix: zero pivot at index {index}")]
    Singular { index: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid sparse structure: {0}")]
    InvalidStructure(String),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("residual check failed: {residual:e} > {bound:e}")]
    ResidualCheck { residual: f64, bound: f64 },
    #[error("no convergence after {iterations} iterations (last value {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("iteration breakdown at relative residual {residual:e}")]
    Breakdown { residual: f64 },
    #[error("unknown field {0}")]
    UnknownField(String),
}
