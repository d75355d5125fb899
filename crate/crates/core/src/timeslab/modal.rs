//! Exact direct solver for slab systems that diagonalizes the temporal
//! coupling.
//!
//! A slab matrix has the form `D ⊗ S + W ⊗ A` with the spatial operators
//! `S = diag(M, ρM, c0 Mp)` and `A = [[0, -M, 0], [A, 0, C], [0, -Cᵀ, B]]`,
//! where `W` is diagonal for both schemes. With `W⁻¹D = U Λ U⁻¹` the system
//! splits into one spatial problem `(λ S + A) y = z` per eigenvalue; a
//! conjugate pair needs only one of them. The first row gives
//! `v = λ u - M⁻¹ z_u`, which leaves the complex symmetric problem
//!
//! ```text
//! [ λ² ρM + A        C          ] [u]   [ z_v + λ ρM w      ]
//! [ Cᵀ        -(c0 Mp + B / λ)  ] [p] = [ (Cᵀ w - z_p) / λ  ],  w = M⁻¹ z_u.
//! ```
//!
//! Scaling the rows by `conj(λ)` and `-λ` gives a matrix with positive
//! definite Hermitian part (`Re λ > 0` for both schemes), so `L D Lᵀ`
//! without pivoting exists for any symmetric ordering.

use std::collections::BTreeSet;

use faer::linalg::solvers::DenseSolveCore;
use faer::{c64, Mat};

use super::{SlabMatrices, TemporalMatrices};
use crate::error::SolverError;
use crate::linalg::{SparseLdlt, SparseMatrix, SymmetricCsr};
use crate::spaces::ConstraintSet;

struct Mode {
    /// Column of the eigenvector matrix.
    index: usize,
    lambda: c64,
    /// Whether the conjugate eigenvalue is folded into this mode.
    paired: bool,
    solver: SparseLdlt<c64>,
}

pub(super) struct ModalSolver {
    nt: usize,
    nu: usize,
    np: usize,
    /// `U⁻¹ W⁻¹`, row-major.
    left: Vec<Vec<c64>>,
    /// Eigenvector matrix `U`, row-major.
    right: Vec<Vec<c64>>,
    modes: Vec<Mode>,
    mass: SparseLdlt<c64>,
    mats: SlabMatrices,
    constrained: Vec<usize>,
    factor_nnz: usize,
}

/// Complex CSR from block rows of real matrices with complex weights.
/// `blocks[r]` lists `(weight, matrix, column offset)` for block row `r`;
/// rows and columns in `skip` are dropped and replaced by a unit diagonal.
fn combine(n: usize, blocks: &[Vec<(c64, &SparseMatrix, usize)>], skip: &[bool]) -> SymmetricCsr<c64> {
    let mut row_ptr = vec![0];
    let mut col_idx = Vec::new();
    let mut values = Vec::new();
    let mut acc = vec![c64::new(0.0, 0.0); n];
    let mut marked = vec![false; n];
    let mut cols = Vec::new();
    let mut row = 0;
    for brow in blocks {
        let nr = brow.first().map_or(0, |(_, m, _)| m.nrows());
        for i in 0..nr {
            if skip[row] {
                col_idx.push(row);
                values.push(c64::new(1.0, 0.0));
            } else {
                cols.clear();
                for &(w, m, off) in brow {
                    let (ci, vi) = m.row(i);
                    for (&c, &v) in ci.iter().zip(vi) {
                        let c = c + off;
                        if skip[c] {
                            continue;
                        }
                        if !marked[c] {
                            marked[c] = true;
                            cols.push(c);
                        }
                        acc[c] += w * v;
                    }
                }
                cols.sort_unstable();
                for &c in &cols {
                    col_idx.push(c);
                    values.push(acc[c]);
                    acc[c] = c64::new(0.0, 0.0);
                    marked[c] = false;
                }
            }
            row_ptr.push(col_idx.len());
            row += 1;
        }
    }
    SymmetricCsr {
        n,
        row_ptr,
        col_idx,
        values,
    }
}

fn matvec_c(a: &SparseMatrix, x: &[c64]) -> Vec<c64> {
    (0..a.nrows())
        .map(|i| {
            let (ci, vi) = a.row(i);
            ci.iter().zip(vi).fold(c64::new(0.0, 0.0), |s, (&c, &v)| s + x[c] * v)
        })
        .collect()
}

fn matvec_c_transpose(a: &SparseMatrix, x: &[c64]) -> Vec<c64> {
    let mut y = vec![c64::new(0.0, 0.0); a.ncols()];
    for (i, xi) in x.iter().enumerate() {
        let (ci, vi) = a.row(i);
        for (&c, &v) in ci.iter().zip(vi) {
            y[c] += xi * v;
        }
    }
    y
}

impl ModalSolver {
    pub(super) fn new(tm: &TemporalMatrices, mats: &SlabMatrices, constraints: &ConstraintSet) -> Result<Self, SolverError> {
        let nt = tm.n_unknown();
        let (nu, np) = (mats.n_vector(), mats.n_pressure());
        for i in 0..nt {
            for j in 0..nt {
                if i != j && tm.mass[i][j] != 0.0 {
                    return Err(SolverError::SingularMatrix);
                }
            }
            if tm.mass[i][i] == 0.0 {
                return Err(SolverError::SingularMatrix);
            }
        }
        let t = Mat::<f64>::from_fn(nt, nt, |i, j| tm.deriv[i][j] / tm.mass[i][i]);
        let evd = t.eigen().map_err(|_| SolverError::SingularMatrix)?;
        let u = evd.U();
        let lambda: Vec<c64> = (0..nt).map(|m| evd.S()[m]).collect();
        let uinv = u.partial_piv_lu().inverse();
        let right: Vec<Vec<c64>> = (0..nt).map(|j| (0..nt).map(|m| u[(j, m)]).collect()).collect();
        let left: Vec<Vec<c64>> = (0..nt)
            .map(|m| (0..nt).map(|i| uinv[(m, i)] / tm.mass[i][i]).collect())
            .collect();
        if left.iter().chain(&right).flatten().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SolverError::SingularMatrix);
        }
        if lambda.iter().any(|l| l.re <= 0.0) {
            return Err(SolverError::SingularMatrix);
        }

        let mut skip = vec![false; nu + np];
        for &d in constraints.keys() {
            skip[d] = true;
        }
        let one = c64::new(1.0, 0.0);
        let mass = SparseLdlt::factor(&combine(nu, &[vec![(one, &*mats.mass_vec, 0)]], &skip[..nu]))?;
        let mut factor_nnz = mass.factor_nnz();

        let scale = lambda.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut used = BTreeSet::new();
        let mut modes = Vec::new();
        for m in 0..nt {
            if used.contains(&m) {
                continue;
            }
            used.insert(m);
            let l = lambda[m];
            let paired = l.im.abs() > 1e-12 * scale;
            if paired {
                let p = (0..nt)
                    .filter(|q| !used.contains(q))
                    .min_by(|&a, &b| (lambda[a] - l.conj()).norm().total_cmp(&(lambda[b] - l.conj()).norm()))
                    .ok_or(SolverError::SingularMatrix)?;
                if (lambda[p] - l.conj()).norm() > 1e-8 * scale {
                    return Err(SolverError::SingularMatrix);
                }
                used.insert(p);
            }
            let k = combine(
                nu + np,
                &[
                    vec![(l * l, &*mats.mass_u, 0), (one, &*mats.a, 0), (one, &*mats.c, nu)],
                    vec![(one, &*mats.ct, 0), (-one, &*mats.mass_p, nu), (-one / l, &*mats.b, nu)],
                ],
                &skip,
            );
            let solver = SparseLdlt::factor(&k)?;
            factor_nnz += solver.factor_nnz();
            modes.push(Mode {
                index: m,
                lambda: l,
                paired,
                solver,
            });
        }
        Ok(Self {
            nt,
            nu,
            np,
            left,
            right,
            modes,
            mass,
            mats: mats.clone(),
            constrained: constraints.keys().copied().collect(),
            factor_nnz,
        })
    }

    /// Stored entries of all `L` factors.
    pub(super) fn factor_nnz(&self) -> usize {
        self.factor_nnz
    }

    pub(super) fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
        let (nt, nu, np) = (self.nt, self.nu, self.np);
        let ns = 2 * nu + np;
        if rhs.len() != nt * ns {
            return Err(SolverError::DimensionMismatch {
                expected: nt * ns,
                got: rhs.len(),
            });
        }
        let uo = |i: usize| i * nu;
        let vo = |i: usize| (nt + i) * nu;
        let po = |i: usize| 2 * nt * nu + i * np;
        let zero = c64::new(0.0, 0.0);
        let mut x = vec![0.0; nt * ns];
        for mode in &self.modes {
            let (m, l) = (mode.index, mode.lambda);
            let mut zu = vec![zero; nu];
            let mut zv = vec![zero; nu];
            let mut zp = vec![zero; np];
            for i in 0..nt {
                let w = self.left[m][i];
                zu.iter_mut().zip(&rhs[uo(i)..uo(i) + nu]).for_each(|(z, r)| *z += w * r);
                zv.iter_mut().zip(&rhs[vo(i)..vo(i) + nu]).for_each(|(z, r)| *z += w * r);
                zp.iter_mut().zip(&rhs[po(i)..po(i) + np]).for_each(|(z, r)| *z += w * r);
            }
            for &c in &self.constrained {
                zu[c] = zero;
            }
            let w = self.mass.solve(&zu)?;
            let mw = matvec_c(&self.mats.mass_u, &w);
            let ctw = matvec_c_transpose(&self.mats.c, &w);
            let mut b: Vec<c64> = zv.iter().zip(&mw).map(|(z, q)| z + l * q).collect();
            for &c in &self.constrained {
                b[c] = zero;
            }
            b.extend(zp.iter().zip(&ctw).map(|(z, q)| (q - z) / l));
            let y = mode.solver.solve(&b)?;
            let (yu, yp) = y.split_at(nu);
            let yv: Vec<c64> = yu.iter().zip(&w).map(|(u, w)| l * u - w).collect();
            // a conjugate partner contributes the complex conjugate
            let factor = if mode.paired { 2.0 } else { 1.0 };
            for j in 0..nt {
                let c = self.right[j][m];
                let add = |dst: &mut [f64], src: &[c64]| {
                    dst.iter_mut().zip(src).for_each(|(d, s)| *d += factor * (c * s).re);
                };
                add(&mut x[uo(j)..uo(j) + nu], yu);
                add(&mut x[vo(j)..vo(j) + nu], &yv);
                add(&mut x[po(j)..po(j) + np], yp);
            }
        }
        Ok(x)
    }
}
