use faer::linalg::solvers::SolveCore;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{Conj, MatMut};

use super::csr::norm2;
use super::{CsrMatrix, LinalgError};

const REFINEMENT_STEPS: usize = 3;

/// Sparse LU factorization (column approximate minimum degree ordering,
/// partial pivoting) that can be reused for many right-hand sides.
pub struct LuFactorization {
    a: CsrMatrix,
    // factors of Aᵀ: the CSR arrays of A are the CSC arrays of Aᵀ
    lu: Lu<usize, f64>,
    norm: f64,
}

impl std::fmt::Debug for LuFactorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LuFactorization")
            .field("n", &self.a.nrows())
            .field("nnz", &self.a.nnz())
            .finish()
    }
}

impl LuFactorization {
    pub fn new(a: &CsrMatrix) -> Result<LuFactorization, LinalgError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(LinalgError::DimensionMismatch(format!(
                "matrix is {}x{}, expected square",
                n,
                a.ncols()
            )));
        }
        let sym = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let symbolic = SymbolicLu::try_new(sym).map_err(|e| LinalgError::Factorization(format!("{e:?}")))?;
        let mat = SparseColMatRef::new(sym, a.values());
        let lu = Lu::try_new_with_symbolic(symbolic, mat).map_err(|e| match e {
            LuError::SymbolicSingular { index } => LinalgError::Singular { index },
            LuError::Generic(g) => LinalgError::Factorization(format!("{g:?}")),
        })?;
        Ok(LuFactorization {
            a: a.clone(),
            lu,
            norm: a.frobenius_norm(),
        })
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &CsrMatrix {
        &self.a
    }

    fn raw(&self, b: &[f64], transpose: bool) -> Result<Vec<f64>, LinalgError> {
        let mut x = b.to_vec();
        let n = x.len();
        let rhs = MatMut::from_column_major_slice_mut(&mut x, n, 1);
        if transpose {
            self.lu.solve_in_place_with_conj(Conj::No, rhs);
        } else {
            self.lu.solve_transpose_in_place_with_conj(Conj::No, rhs);
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::Singular { index });
        }
        Ok(x)
    }

    fn checked(&self, b: &[f64], transpose: bool) -> Result<Vec<f64>, LinalgError> {
        if b.len() != self.dim() {
            return Err(LinalgError::DimensionMismatch(format!(
                "rhs has length {}, expected {}",
                b.len(),
                self.dim()
            )));
        }
        let apply = |x: &[f64]| {
            if transpose {
                // (Aᵀx)_j = Σ_i A_ij x_i
                let mut y = vec![0.0; x.len()];
                for (i, j, v) in self.a.iter() {
                    y[j] += v * x[i];
                }
                y
            } else {
                self.a.matvec(x)
            }
        };
        let mut x = self.raw(b, transpose)?;
        let bnorm = norm2(b);
        for step in 0..=REFINEMENT_STEPS {
            let ax = apply(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            let res = norm2(&r);
            let bound = 1e-10 * (self.norm * norm2(&x) + bnorm);
            if res <= bound {
                return Ok(x);
            }
            if step == REFINEMENT_STEPS {
                return Err(LinalgError::ResidualCheck { residual: res, bound });
            }
            let dx = self.raw(&r, transpose)?;
            x.iter_mut().zip(&dx).for_each(|(xi, d)| *xi += d);
        }
        unreachable!()
    }

    /// Solves `A x = b`; the residual bound
    /// `‖Ax − b‖ ≤ 1e-10 (‖A‖_F ‖x‖ + ‖b‖)` is verified, with iterative
    /// refinement if needed.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.checked(b, false)
    }

    /// Solves `Aᵀ y = c` with the same residual contract.
    pub fn solve_transpose(&self, c: &[f64]) -> Result<Vec<f64>, LinalgError> {
        self.checked(c, true)
    }
}

/// One-shot sparse direct solve.
pub fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    LuFactorization::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_two_by_two() {
        let b = vec![1.5, -2.0, 3.0];
        assert_eq!(solve_direct(&CsrMatrix::identity(3), &b).unwrap(), b);
        let a = CsrMatrix::from_dense(&[vec![2.0, 1.0], vec![1.0, 3.0]]);
        let x = solve_direct(&a, &[3.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nonsymmetric_and_transpose() {
        let a = CsrMatrix::from_dense(&[
            vec![4.0, 1.0, 0.0],
            vec![-2.0, 5.0, 1.0],
            vec![0.0, 3.0, 6.0],
        ]);
        let lu = LuFactorization::new(&a).unwrap();
        let x = lu.solve(&[1.0, 2.0, 3.0]).unwrap();
        let ax = a.matvec(&x);
        assert!((ax[0] - 1.0).abs() < 1e-14 && (ax[2] - 3.0).abs() < 1e-14);
        let y = lu.solve_transpose(&[1.0, 2.0, 3.0]).unwrap();
        let aty = a.transpose().matvec(&y);
        assert!((aty[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_reported() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 0.0], vec![0.0, 0.0]]);
        let err = solve_direct(&a, &[1.0, 1.0]).unwrap_err();
        assert!(err.to_string().contains("singular matrix"), "{err}");
    }
}
