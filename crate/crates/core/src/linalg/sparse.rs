use std::collections::BTreeMap;
use std::io::Write;

use crate::error::SolverError;

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Debug, Clone)]
pub struct TripletBuilder {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    /// Adds a dense local block `local[i * cols.len() + j]` at `(rows[i], cols[j])`.
    pub fn add_block(&mut self, rows: &[usize], cols: &[usize], local: &[f64]) {
        for (i, &r) in rows.iter().enumerate() {
            for (j, &c) in cols.iter().enumerate() {
                self.add(r, c, local[i * cols.len() + j]);
            }
        }
    }

    pub fn build(self) -> SparseMatrix {
        let TripletBuilder {
            nrows,
            ncols,
            entries,
        } = self;
        // counting sort by row, stable within rows
        let mut counts = vec![0usize; nrows + 1];
        for &(r, _, _) in &entries {
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut by_row = vec![(0usize, 0.0f64); entries.len()];
        for &(r, c, v) in &entries {
            by_row[next[r]] = (c, v);
            next[r] += 1;
        }
        drop(entries);
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        let mut col_idx = Vec::with_capacity(by_row.len());
        let mut values = Vec::with_capacity(by_row.len());
        row_ptr.push(0);
        for r in 0..nrows {
            let row = &mut by_row[counts[r]..counts[r + 1]];
            row.sort_by_key(|e| e.0);
            for &(c, v) in row.iter() {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == c {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl SparseMatrix {
    pub fn from_triplets(nrows: usize, ncols: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut b = TripletBuilder::with_capacity(nrows, ncols, entries.len());
        for &(r, c, v) in entries {
            b.add(r, c, v);
        }
        b.build()
    }

    /// Builds a matrix from raw CSR arrays, which must already be sorted and unique per row.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Self {
        assert_eq!(row_ptr.len(), nrows + 1);
        assert_eq!(col_idx.len(), values.len());
        debug_assert!((0..nrows).all(|r| {
            col_idx[row_ptr[r]..row_ptr[r + 1]]
                .windows(2)
                .all(|w| w[0] < w[1])
        }));
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self::from_csr(nrows, ncols, vec![0; nrows + 1], Vec::new(), Vec::new())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_csr(n, n, (0..=n).collect(), (0..n).collect(), vec![1.0; n])
    }

    pub fn diagonal_matrix(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_csr(n, n, (0..=n).collect(), (0..n).collect(), diag.to_vec())
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `r`.
    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.col_idx[range.clone()], &self.values[range])
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let (cols, vals) = self.row(r);
        cols.binary_search(&c).map(|k| vals[k]).unwrap_or(0.0)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>, SolverError> {
        if x.len() != self.ncols {
            return Err(SolverError::DimensionMismatch {
                expected: self.ncols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.nrows];
        self.matvec_into(x, &mut y);
        Ok(y)
    }

    /// `y = A x` without dimension checks.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    /// `y += alpha * A^T x`.
    pub fn matvec_transpose_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        for (r, &xr) in x.iter().enumerate() {
            let s = alpha * xr;
            if s != 0.0 {
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    y[self.col_idx[k]] += self.values[k] * s;
                }
            }
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut next = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                col_idx[next[c]] = r;
                values[next[c]] = self.values[k];
                next[c] += 1;
            }
        }
        SparseMatrix::from_csr(self.ncols, self.nrows, counts, col_idx, values)
    }

    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let mut m = self.clone();
        m.values.iter_mut().for_each(|v| *v *= s);
        m
    }

    /// `sum_i alpha_i * A_i` over matrices of equal shape.
    pub fn linear_combination(terms: &[(f64, &SparseMatrix)]) -> SparseMatrix {
        let (nrows, ncols) = (terms[0].1.nrows, terms[0].1.ncols);
        assert!(terms.iter().all(|(_, m)| m.nrows == nrows && m.ncols == ncols));
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0; ncols];
        let mut seen = vec![false; ncols];
        let mut cols = Vec::new();
        for r in 0..nrows {
            for &(alpha, m) in terms {
                let (c, v) = m.row(r);
                for (&ci, &vi) in c.iter().zip(v) {
                    if !seen[ci] {
                        seen[ci] = true;
                        cols.push(ci);
                    }
                    acc[ci] += alpha * vi;
                }
            }
            cols.sort_unstable();
            for &c in &cols {
                col_idx.push(c);
                values.push(acc[c]);
                acc[c] = 0.0;
                seen[c] = false;
            }
            cols.clear();
            row_ptr.push(col_idx.len());
        }
        SparseMatrix::from_csr(nrows, ncols, row_ptr, col_idx, values)
    }

    /// Largest entry of `|A - A^T|`.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        Self::linear_combination(&[(1.0, self), (-1.0, &t)])
            .values
            .iter()
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (r, row) in d.iter_mut().enumerate() {
            let (c, v) = self.row(r);
            for (&ci, &vi) in c.iter().zip(v) {
                row[ci] = vi;
            }
        }
        d
    }

    /// Replaces constrained rows by identity rows and eliminates constrained
    /// columns into `rhs`, which receives the prescribed values.
    pub fn apply_constraints(&self, rhs: &mut [f64], constraints: &BTreeMap<usize, f64>) -> SparseMatrix {
        assert_eq!(self.nrows, self.ncols);
        let mut fixed = vec![None; self.nrows];
        for (&d, &v) in constraints {
            fixed[d] = Some(v);
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for r in 0..self.nrows {
            if let Some(g) = fixed[r] {
                col_idx.push(r);
                values.push(1.0);
                rhs[r] = g;
            } else {
                let (c, v) = self.row(r);
                for (&ci, &vi) in c.iter().zip(v) {
                    match fixed[ci] {
                        Some(g) => rhs[r] -= vi * g,
                        None => {
                            col_idx.push(ci);
                            values.push(vi);
                        }
                    }
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix::from_csr(self.nrows, self.ncols, row_ptr, col_idx, values)
    }

    /// Writes `row col value` lines (0-based indices).
    pub fn write_coordinate<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "% {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for r in 0..self.nrows {
            let (c, v) = self.row(r);
            for (&ci, &vi) in c.iter().zip(v) {
                writeln!(w, "{r} {ci} {vi:.17e}")?;
            }
        }
        Ok(())
    }
}
