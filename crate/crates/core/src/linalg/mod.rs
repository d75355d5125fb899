//! Sparse storage, block composition and linear solvers.

mod block;
mod direct;
mod gmres;
mod ilu;
mod ldlt;
mod sparse;

pub use block::{BlockSystem, BlockTerms};
pub use direct::{solve_direct, DirectSolver};
pub use gmres::{solve_gmres, GmresOptions, SolveStats};
pub use ilu::Ilu0;
pub use ldlt::{Scalar, SparseLdlt, SymmetricCsr};
pub use sparse::{SparseMatrix, TripletBuilder};

/// Square linear operator `y = A x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_into(x, y)
    }
}

/// Approximate inverse action `z ≈ M^{-1} r`.
pub trait Preconditioner {
    fn apply(&self, r: &[f64], z: &mut [f64]);
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Preconditioner for Identity {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Diagonal scaling; zero diagonal entries act as identity.
#[derive(Debug, Clone)]
pub struct Jacobi {
    inv_diag: Vec<f64>,
}

impl Jacobi {
    pub fn new(a: &SparseMatrix) -> Self {
        let inv_diag = a
            .diagonal()
            .into_iter()
            .map(|d| if d != 0.0 { 1.0 / d } else { 1.0 })
            .collect();
        Self { inv_diag }
    }
}

impl Preconditioner for Jacobi {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&self.inv_diag) {
            *zi = ri * di;
        }
    }
}

impl Preconditioner for DirectSolver {
    fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self.solve(r) {
            Ok(x) => z.copy_from_slice(&x),
            Err(_) => z.iter_mut().for_each(|v| *v = f64::NAN),
        }
    }
}
