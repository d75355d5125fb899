use std::sync::Arc;

use super::{LinearOperator, SparseMatrix};
use crate::error::SolverError;

/// A block entry stored as a linear combination `Σ c_i M_i` of shared matrices.
pub type BlockTerms = Vec<(f64, Arc<SparseMatrix>)>;

/// Grid of sparse blocks; empty entries are zero blocks.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    row_sizes: Vec<usize>,
    col_sizes: Vec<usize>,
    row_offsets: Vec<usize>,
    col_offsets: Vec<usize>,
    blocks: Vec<Vec<BlockTerms>>,
}

fn offsets(sizes: &[usize]) -> Vec<usize> {
    let mut o = vec![0];
    for s in sizes {
        o.push(o.last().unwrap() + s);
    }
    o
}

impl BlockSystem {
    pub fn new(row_sizes: Vec<usize>, col_sizes: Vec<usize>) -> Self {
        let blocks = vec![vec![Vec::new(); col_sizes.len()]; row_sizes.len()];
        Self {
            row_offsets: offsets(&row_sizes),
            col_offsets: offsets(&col_sizes),
            row_sizes,
            col_sizes,
            blocks,
        }
    }

    pub fn n_block_rows(&self) -> usize {
        self.row_sizes.len()
    }

    pub fn n_block_cols(&self) -> usize {
        self.col_sizes.len()
    }

    pub fn nrows(&self) -> usize {
        *self.row_offsets.last().unwrap()
    }

    pub fn ncols(&self) -> usize {
        *self.col_offsets.last().unwrap()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_offsets(&self) -> &[usize] {
        &self.col_offsets
    }

    /// Adds `coeff * m` to block `(bi, bj)`. Zero coefficients are skipped.
    pub fn add(&mut self, bi: usize, bj: usize, coeff: f64, m: &Arc<SparseMatrix>) -> Result<(), SolverError> {
        if m.nrows() != self.row_sizes[bi] {
            return Err(SolverError::DimensionMismatch {
                expected: self.row_sizes[bi],
                got: m.nrows(),
            });
        }
        if m.ncols() != self.col_sizes[bj] {
            return Err(SolverError::DimensionMismatch {
                expected: self.col_sizes[bj],
                got: m.ncols(),
            });
        }
        if coeff != 0.0 {
            self.blocks[bi][bj].push((coeff, Arc::clone(m)));
        }
        Ok(())
    }

    pub fn block(&self, bi: usize, bj: usize) -> &BlockTerms {
        &self.blocks[bi][bj]
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, SolverError> {
        if x.len() != self.ncols() {
            return Err(SolverError::DimensionMismatch {
                expected: self.ncols(),
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.nrows()];
        self.apply(x, &mut y);
        Ok(y)
    }

    /// Monolithic CSR matrix, assembled row by row.
    pub fn to_csr(&self) -> SparseMatrix {
        let (n, m) = (self.nrows(), self.ncols());
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz_est: usize = self
            .blocks
            .iter()
            .flatten()
            .map(|t| t.iter().map(|(_, a)| a.nnz()).max().unwrap_or(0))
            .sum();
        let mut col_idx = Vec::with_capacity(nnz_est);
        let mut values = Vec::with_capacity(nnz_est);
        let mut acc = vec![0.0; m];
        let mut seen = vec![false; m];
        let mut cols = Vec::new();
        for (bi, brow) in self.blocks.iter().enumerate() {
            for r in 0..self.row_sizes[bi] {
                for (bj, terms) in brow.iter().enumerate() {
                    let off = self.col_offsets[bj];
                    cols.clear();
                    for (c, a) in terms {
                        let (ci, vi) = a.row(r);
                        for (&j, &v) in ci.iter().zip(vi) {
                            let g = off + j;
                            if !seen[g] {
                                seen[g] = true;
                                cols.push(g);
                            }
                            acc[g] += c * v;
                        }
                    }
                    cols.sort_unstable();
                    for &g in &cols {
                        col_idx.push(g);
                        values.push(acc[g]);
                        acc[g] = 0.0;
                        seen[g] = false;
                    }
                }
                row_ptr.push(col_idx.len());
            }
        }
        SparseMatrix::from_csr(n, m, row_ptr, col_idx, values)
    }
}

impl LinearOperator for BlockSystem {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        let mut tmp = Vec::new();
        for (bi, brow) in self.blocks.iter().enumerate() {
            let yr = &mut y[self.row_offsets[bi]..self.row_offsets[bi + 1]];
            for (bj, terms) in brow.iter().enumerate() {
                let xs = &x[self.col_offsets[bj]..self.col_offsets[bj + 1]];
                for (c, a) in terms {
                    tmp.resize(yr.len(), 0.0);
                    a.matvec_into(xs, &mut tmp);
                    for (u, t) in yr.iter_mut().zip(&tmp) {
                        *u += c * t;
                    }
                }
            }
        }
    }
}
