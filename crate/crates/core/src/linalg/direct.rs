use faer::linalg::solvers::Solve;
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::Mat;

use super::SparseMatrix;
use crate::error::SolverError;

/// Sparse LU factorization with partial pivoting, computed once and reused
/// for any number of right-hand sides.
pub struct DirectSolver {
    n: usize,
    // LU of A^T: the CSR arrays of A are read as the CSC arrays of A^T, and
    // the transposed solve then yields A^{-1} b.
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
}

impl std::fmt::Debug for DirectSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DirectSolver").field("n", &self.n).finish()
    }
}

impl DirectSolver {
    pub fn factor(a: &SparseMatrix) -> Result<Self, SolverError> {
        if a.nrows() != a.ncols() {
            return Err(SolverError::DimensionMismatch {
                expected: a.nrows(),
                got: a.ncols(),
            });
        }
        let n = a.nrows();
        let symbolic = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let at = SparseColMatRef::new(symbolic, a.values());
        let lu = at.sp_lu().map_err(|e| match e {
            LuError::SymbolicSingular { .. } => SolverError::SingularMatrix,
            LuError::Generic(_) => SolverError::SingularMatrix,
        })?;
        Ok(Self { n, lu })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolverError> {
        if b.len() != self.n {
            return Err(SolverError::DimensionMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        let mut rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        self.lu.solve_transpose_in_place(rhs.as_mut());
        let x: Vec<f64> = (0..self.n).map(|i| rhs[(i, 0)]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::SingularMatrix);
        }
        Ok(x)
    }
}

/// One-shot convenience wrapper around [`DirectSolver`].
pub fn solve_direct(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>, SolverError> {
    DirectSolver::factor(a)?.solve(b)
}
