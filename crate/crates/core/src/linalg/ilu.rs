use super::{Preconditioner, SparseMatrix};
use crate::error::SolverError;

/// Incomplete LU factorization without fill (ILU(0)); L has unit diagonal and
/// both factors share the sparsity pattern of the input.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: SparseMatrix,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &SparseMatrix) -> Result<Self, SolverError> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(SolverError::DimensionMismatch {
                expected: n,
                got: a.ncols(),
            });
        }
        let row_ptr = a.row_ptr().to_vec();
        let col_idx = a.col_idx().to_vec();
        let mut val = a.values().to_vec();
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                if col_idx[k] == i {
                    diag_pos[i] = k;
                }
            }
            if diag_pos[i] == usize::MAX {
                return Err(SolverError::ZeroPivot { row: i });
            }
        }
        // position lookup for the current row
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (row_ptr[i], row_ptr[i + 1]);
            for k in start..end {
                pos[col_idx[k]] = k;
            }
            for k in start..end {
                let j = col_idx[k];
                if j >= i {
                    break;
                }
                let piv = val[diag_pos[j]];
                let lij = val[k] / piv;
                val[k] = lij;
                for m in diag_pos[j] + 1..row_ptr[j + 1] {
                    let p = pos[col_idx[m]];
                    if p != usize::MAX {
                        val[p] -= lij * val[m];
                    }
                }
            }
            let d = val[diag_pos[i]];
            if d == 0.0 || !d.is_finite() {
                return Err(SolverError::ZeroPivot { row: i });
            }
            for k in start..end {
                pos[col_idx[k]] = usize::MAX;
            }
        }
        Ok(Self {
            lu: SparseMatrix::from_csr(n, n, row_ptr, col_idx, val),
            diag_pos,
        })
    }
}

impl Preconditioner for Ilu0 {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let n = self.diag_pos.len();
        let (rp, ci, v) = (self.lu.row_ptr(), self.lu.col_idx(), self.lu.values());
        for i in 0..n {
            let mut s = r[i];
            for k in rp[i]..self.diag_pos[i] {
                s -= v[k] * z[ci[k]];
            }
            z[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = z[i];
            for k in self.diag_pos[i] + 1..rp[i + 1] {
                s -= v[k] * z[ci[k]];
            }
            z[i] = s / v[self.diag_pos[i]];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> SparseMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
            }
        }
        SparseMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn diagonal_is_inverted_exactly() {
        let a = SparseMatrix::diagonal_matrix(&[2.0, 4.0, 0.5]);
        let p = Ilu0::new(&a).unwrap();
        let mut z = vec![0.0; 3];
        p.apply(&[1.0, 1.0, 1.0], &mut z);
        assert_eq!(z, vec![0.5, 0.25, 2.0]);
    }

    #[test]
    fn tridiagonal_ilu_is_exact() {
        let a = tridiag(40);
        let p = Ilu0::new(&a).unwrap();
        for j in [0, 17, 39] {
            let mut e = vec![0.0; 40];
            e[j] = 1.0;
            let ae = a.matvec(&e).unwrap();
            let mut z = vec![0.0; 40];
            p.apply(&ae, &mut z);
            for i in 0..40 {
                assert!((z[i] - e[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = SparseMatrix::diagonal_matrix(&[1.0, 0.0, 3.0]);
        assert_eq!(Ilu0::new(&a).unwrap_err(), SolverError::ZeroPivot { row: 1 });
    }
}
