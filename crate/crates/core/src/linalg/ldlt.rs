//! Sparse `L D Lᵀ` factorization without pivoting for symmetric (real or
//! complex symmetric, not Hermitian) matrices, with a fill-reducing minimum
//! degree ordering.
//!
//! Without pivoting the factorization exists when every leading principal
//! submatrix of the permuted matrix is nonsingular, e.g. for symmetric
//! quasi-definite matrices or matrices `D H` with `D` diagonal and `H`
//! having a positive definite Hermitian part.

use std::ops::{Add, Div, Mul, Sub};

use faer::c64;
use faer::dyn_stack::{MemBuffer, MemStack};
use faer::sparse::linalg::amd;
use faer::sparse::SymbolicSparseColMatRef;

use crate::error::SolverError;

/// Scalar field of the factorization.
pub trait Scalar:
    Copy + PartialEq + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    const ZERO: Self;
    fn is_finite(self) -> bool;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for c64 {
    const ZERO: Self = c64 { re: 0.0, im: 0.0 };
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Square sparse matrix in CSR form with a structurally symmetric pattern
/// (only the pattern needs to be symmetric for the ordering; the values
/// must be symmetric for the factorization to be meaningful).
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricCsr<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<T>,
}

impl<T: Scalar> SymmetricCsr<T> {
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1]).fold(T::ZERO, |acc, q| acc + self.values[q] * x[self.col_idx[q]])
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct SparseLdlt<T> {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    l_ptr: Vec<usize>,
    l_idx: Vec<usize>,
    l_val: Vec<T>,
    d: Vec<T>,
}

fn minimum_degree(a: &SymmetricCsr<impl Scalar>) -> Result<Vec<usize>, SolverError> {
    let n = a.n;
    let pattern = SymbolicSparseColMatRef::new_checked(n, n, &a.row_ptr, None, &a.col_idx);
    let mut perm = vec![0usize; n];
    let mut perm_inv = vec![0usize; n];
    let mut mem = MemBuffer::try_new(amd::order_maybe_unsorted_scratch::<usize>(n, a.col_idx.len()))
        .map_err(|_| SolverError::SingularMatrix)?;
    amd::order_maybe_unsorted(
        &mut perm,
        &mut perm_inv,
        pattern,
        amd::Control::default(),
        MemStack::new(&mut mem),
    )
    .map_err(|_| SolverError::SingularMatrix)?;
    Ok(perm)
}

impl<T: Scalar> SparseLdlt<T> {
    /// Orders with approximate minimum degree and factors.
    pub fn factor(a: &SymmetricCsr<T>) -> Result<Self, SolverError> {
        let perm = minimum_degree(a)?;
        Self::factor_with_ordering(a, perm)
    }

    /// Factors `P A Pᵀ` with `perm[new] = old`.
    pub fn factor_with_ordering(a: &SymmetricCsr<T>, perm: Vec<usize>) -> Result<Self, SolverError> {
        let n = a.n;
        if perm.len() != n || a.row_ptr.len() != n + 1 {
            return Err(SolverError::DimensionMismatch {
                expected: n,
                got: perm.len(),
            });
        }
        let mut inv = vec![usize::MAX; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        // upper part of the permuted matrix by columns: column k holds the
        // entries (i, k) with i <= k in the new numbering
        let mut counts = vec![0usize; n + 1];
        for old_r in 0..n {
            let r = inv[old_r];
            for q in a.row_ptr[old_r]..a.row_ptr[old_r + 1] {
                let c = inv[a.col_idx[q]];
                if r <= c {
                    counts[c + 1] += 1;
                }
            }
        }
        for k in 0..n {
            counts[k + 1] += counts[k];
        }
        let up_ptr = counts.clone();
        let mut fill = counts;
        let mut up_idx = vec![0usize; up_ptr[n]];
        let mut up_val = vec![T::ZERO; up_ptr[n]];
        for old_r in 0..n {
            let r = inv[old_r];
            for q in a.row_ptr[old_r]..a.row_ptr[old_r + 1] {
                let c = inv[a.col_idx[q]];
                if r <= c {
                    up_idx[fill[c]] = r;
                    up_val[fill[c]] = a.values[q];
                    fill[c] += 1;
                }
            }
        }

        // symbolic: elimination tree and column counts
        const NONE: usize = usize::MAX;
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for &i0 in &up_idx[up_ptr[k]..up_ptr[k + 1]] {
                let mut i = i0;
                while i < k && flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut l_ptr = vec![0usize; n + 1];
        for k in 0..n {
            l_ptr[k + 1] = l_ptr[k] + lnz[k];
        }
        let total = l_ptr[n];
        let mut l_idx = vec![0usize; total];
        let mut l_val = vec![T::ZERO; total];

        // numeric: up-looking, one row of L per step
        let mut d = vec![T::ZERO; n];
        let mut y = vec![T::ZERO; n];
        let mut pattern = vec![0usize; n];
        lnz.iter_mut().for_each(|x| *x = 0);
        flag.iter_mut().for_each(|x| *x = NONE);
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            for q in up_ptr[k]..up_ptr[k + 1] {
                let mut i = up_idx[q];
                y[i] = y[i] + up_val[q];
                let mut len = 0;
                while i < k && flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut dk = y[k];
            y[k] = T::ZERO;
            while top < n {
                let i = pattern[top];
                top += 1;
                let yi = y[i];
                y[i] = T::ZERO;
                let end = l_ptr[i] + lnz[i];
                for p in l_ptr[i]..end {
                    let r = l_idx[p];
                    y[r] = y[r] - l_val[p] * yi;
                }
                let lki = yi / d[i];
                dk = dk - lki * yi;
                l_idx[end] = k;
                l_val[end] = lki;
                lnz[i] += 1;
            }
            if dk == T::ZERO || !dk.is_finite() {
                return Err(SolverError::ZeroPivot { row: perm[k] });
            }
            d[k] = dk;
        }
        Ok(Self {
            n,
            perm,
            l_ptr,
            l_idx,
            l_val,
            d,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the factor `L` (strictly lower part).
    pub fn factor_nnz(&self) -> usize {
        self.l_idx.len()
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>, SolverError> {
        let n = self.n;
        if b.len() != n {
            return Err(SolverError::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        let mut x: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        // L stored by columns: column j holds L[r][j] for r > j
        for j in 0..n {
            let xj = x[j];
            for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                let r = self.l_idx[p];
                x[r] = x[r] - self.l_val[p] * xj;
            }
        }
        for j in 0..n {
            x[j] = x[j] / self.d[j];
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.l_ptr[j]..self.l_ptr[j + 1] {
                s = s - self.l_val[p] * x[self.l_idx[p]];
            }
            x[j] = s;
        }
        let mut out = vec![T::ZERO; n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::SingularMatrix);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};

    fn dense_to_csr<T: Scalar>(n: usize, a: impl Fn(usize, usize) -> T) -> SymmetricCsr<T> {
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = a(i, j);
                if v != T::ZERO {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SymmetricCsr {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// 2D 5-point Laplacian plus shift.
    fn laplacian(m: usize, shift: f64) -> SymmetricCsr<f64> {
        let n = m * m;
        dense_to_csr(n, |i, j| {
            let (xi, yi) = (i % m, i / m);
            let (xj, yj) = (j % m, j / m);
            if i == j {
                4.0 + shift
            } else if (xi == xj && yi.abs_diff(yj) == 1) || (yi == yj && xi.abs_diff(xj) == 1) {
                -1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn real_laplacian_matches_dense_solve() {
        let a = laplacian(12, 0.1);
        let n = a.n;
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = SparseLdlt::factor(&a).unwrap();
        let x = f.solve(&b).unwrap();
        let dense = DMatrix::from_fn(n, n, |i, j| {
            (a.row_ptr[i]..a.row_ptr[i + 1])
                .find(|&q| a.col_idx[q] == j)
                .map_or(0.0, |q| a.values[q])
        });
        let xr = dense.lu().solve(&DVector::from_vec(b)).unwrap();
        for i in 0..n {
            assert!((x[i] - xr[i]).abs() < 1e-12, "{i}");
        }
        // minimum degree keeps the factor well below the dense triangle
        assert!(f.factor_nnz() < n * n / 8, "{}", f.factor_nnz());
    }

    #[test]
    fn quasi_definite_saddle_point() {
        // [[K, B^T], [B, -C]] with K, C SPD
        let m = 6;
        let k = laplacian(m, 1.0);
        let nk = k.n;
        let nc = 5;
        let n = nk + nc;
        let entry = |i: usize, j: usize| -> f64 {
            if i < nk && j < nk {
                (k.row_ptr[i]..k.row_ptr[i + 1])
                    .find(|&q| k.col_idx[q] == j)
                    .map_or(0.0, |q| k.values[q])
            } else if i >= nk && j >= nk {
                if i == j {
                    -2.0
                } else {
                    0.0
                }
            } else {
                let (r, c) = if i >= nk { (i - nk, j) } else { (j - nk, i) };
                if c % nc == r {
                    1.0 + 0.1 * c as f64
                } else {
                    0.0
                }
            }
        };
        let a = dense_to_csr(n, entry);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.7).sin()).collect();
        let x = SparseLdlt::factor(&a).unwrap().solve(&b).unwrap();
        let r = a.matvec(&x);
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn complex_symmetric_shifted_operator() {
        // lambda^2 M + K with complex lambda: symmetric, not Hermitian
        let k = laplacian(10, 0.0);
        let lambda = c64::new(1.3, 1.7);
        let l2 = lambda * lambda;
        let a = SymmetricCsr {
            n: k.n,
            row_ptr: k.row_ptr.clone(),
            col_idx: k.col_idx.clone(),
            values: k
                .row_ptr
                .windows(2)
                .enumerate()
                .flat_map(|(i, w)| {
                    let cols = &k.col_idx;
                    let vals = &k.values;
                    (w[0]..w[1]).map(move |q| {
                        let m = if cols[q] == i { 1.0 } else { 0.0 };
                        c64::new(vals[q], 0.0) + l2 * m
                    })
                })
                .collect(),
        };
        let b: Vec<c64> = (0..a.n).map(|i| c64::new((i as f64).cos(), (i as f64 * 0.3).sin())).collect();
        let x = SparseLdlt::factor(&a).unwrap().solve(&b).unwrap();
        let r = a.matvec(&x);
        for i in 0..a.n {
            assert!((r[i] - b[i]).norm() < 1e-11);
        }
    }

    #[test]
    fn zero_pivot_is_reported() {
        let a = dense_to_csr(2, |i, j| if i == j { 0.0 } else { 1.0 });
        let err = SparseLdlt::factor_with_ordering(&a, vec![0, 1]).unwrap_err();
        assert!(matches!(err, SolverError::ZeroPivot { .. }));
    }
}
