use super::{LinearOperator, Preconditioner};
use crate::error::SolverError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmresOptions {
    pub rel_tol: f64,
    pub max_iter: usize,
    pub restart: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 2000,
            restart: 100,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final relative residual `‖b − Ax‖ / ‖b‖`.
    pub residual: f64,
    /// Relative residual estimate after each iteration, with the initial value first.
    pub history: Vec<f64>,
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Right-preconditioned restarted GMRES starting from `x0` (zero if `None`).
pub fn solve_gmres<A: LinearOperator + ?Sized, P: Preconditioner + ?Sized>(
    a: &A,
    b: &[f64],
    x0: Option<&[f64]>,
    precond: &P,
    opts: &GmresOptions,
) -> Result<(Vec<f64>, SolveStats), SolverError> {
    let n = a.dim();
    if b.len() != n {
        return Err(SolverError::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    if !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0) || opts.restart == 0 {
        return Err(SolverError::NoConvergence {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let mut x = match x0 {
        Some(x0) if x0.len() == n => x0.to_vec(),
        Some(x0) => {
            return Err(SolverError::DimensionMismatch {
                expected: n,
                got: x0.len(),
            })
        }
        None => vec![0.0; n],
    };
    let bnorm = norm(b);
    let mut stats = SolveStats::default();
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        stats.history.push(0.0);
        return Ok((x, stats));
    }
    let m = opts.restart;
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let mut h = vec![vec![0.0; m]; m + 1];
    let (mut cs, mut sn, mut g) = (vec![0.0; m], vec![0.0; m], vec![0.0; m + 1]);

    loop {
        a.apply(&x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let beta = norm(&r);
        let rel = beta / bnorm;
        if !rel.is_finite() {
            return Err(SolverError::BreakdownDetected {
                iteration: stats.iterations,
            });
        }
        if stats.history.is_empty() {
            stats.history.push(rel);
        }
        stats.residual = rel;
        if rel <= opts.rel_tol {
            return Ok((x, stats));
        }
        if stats.iterations >= opts.max_iter {
            return Err(SolverError::NoConvergence {
                iterations: stats.iterations,
                residual: rel,
            });
        }
        basis.clear();
        basis.push(r.iter().map(|v| v / beta).collect());
        g.iter_mut().for_each(|v| *v = 0.0);
        g[0] = beta;
        let mut j = 0;
        while j < m && stats.iterations < opts.max_iter {
            precond.apply(&basis[j], &mut z);
            a.apply(&z, &mut w);
            // modified Gram-Schmidt
            for (i, vi) in basis.iter().enumerate() {
                let hij = dot(&w, vi);
                h[i][j] = hij;
                for (wk, vk) in w.iter_mut().zip(vi) {
                    *wk -= hij * vk;
                }
            }
            let hnext = norm(&w);
            if !hnext.is_finite() {
                return Err(SolverError::BreakdownDetected {
                    iteration: stats.iterations + 1,
                });
            }
            h[j + 1][j] = hnext;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            if d == 0.0 {
                return Err(SolverError::BreakdownDetected {
                    iteration: stats.iterations + 1,
                });
            }
            cs[j] = h[j][j] / d;
            sn[j] = h[j + 1][j] / d;
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            stats.iterations += 1;
            j += 1;
            let est = g[j].abs() / bnorm;
            stats.history.push(est);
            if est <= opts.rel_tol || hnext <= f64::EPSILON * d {
                break;
            }
            basis.push(w.iter().map(|v| v / hnext).collect());
        }
        // back substitution for the j x j triangular system
        let mut y = vec![0.0; j];
        for i in (0..j).rev() {
            let mut s = g[i];
            for l in i + 1..j {
                s -= h[i][l] * y[l];
            }
            y[i] = s / h[i][i];
        }
        w.iter_mut().for_each(|v| *v = 0.0);
        for (i, yi) in y.iter().enumerate() {
            for (wk, vk) in w.iter_mut().zip(&basis[i]) {
                *wk += yi * vk;
            }
        }
        precond.apply(&w, &mut z);
        for (xk, zk) in x.iter_mut().zip(&z) {
            *xk += zk;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{Identity, Ilu0, Jacobi, SparseMatrix};

    fn poisson_1d(n: usize) -> SparseMatrix {
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

    // Thomas algorithm for the (-1, 2, -1) matrix
    fn thomas(b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let (mut c, mut d) = (vec![0.0; n], vec![0.0; n]);
        c[0] = -0.5;
        d[0] = b[0] / 2.0;
        for i in 1..n {
            let m = 2.0 + c[i - 1];
            c[i] = -1.0 / m;
            d[i] = (b[i] + d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    }

    #[test]
    fn jacobi_on_diagonal_converges_immediately() {
        let a = SparseMatrix::diagonal_matrix(&[1.0, 5.0, 100.0, 0.3]);
        let b = vec![1.0, 2.0, 3.0, 4.0];
        let (x, s) = solve_gmres(&a, &b, None, &Jacobi::new(&a), &GmresOptions::default()).unwrap();
        assert!(s.iterations <= 2);
        assert!((x[2] - 0.03).abs() < 1e-14);
    }

    #[test]
    fn poisson_with_ilu_matches_thomas() {
        let a = poisson_1d(100);
        let b: Vec<f64> = (0..100).map(|i| ((i as f64) * 0.37).sin()).collect();
        let opts = GmresOptions::default();
        let (x, s) = solve_gmres(&a, &b, None, &Ilu0::new(&a).unwrap(), &opts).unwrap();
        assert!(s.residual <= 1e-10);
        for (u, v) in x.iter().zip(thomas(&b)) {
            assert!((u - v).abs() < 1e-8);
        }
    }

    #[test]
    fn unpreconditioned_restarts_and_history_decreases() {
        let a = poisson_1d(60);
        let b = vec![1.0; 60];
        let opts = GmresOptions {
            rel_tol: 1e-9,
            max_iter: 5000,
            restart: 10,
        };
        let (x, s) = solve_gmres(&a, &b, None, &Identity, &opts).unwrap();
        let r = a.matvec(&x).unwrap();
        let res: f64 = r.iter().zip(&b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
        assert!(res <= 1e-9 * (60f64).sqrt() * 1.0001);
        assert!(s.history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let a = poisson_1d(5);
        let (x, s) = solve_gmres(&a, &[0.0; 5], None, &Identity, &GmresOptions::default()).unwrap();
        assert_eq!(x, vec![0.0; 5]);
        assert_eq!(s.iterations, 0);
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let a = poisson_1d(200);
        let opts = GmresOptions {
            rel_tol: 1e-12,
            max_iter: 5,
            restart: 5,
        };
        match solve_gmres(&a, &vec![1.0; 200], None, &Identity, &opts) {
            Err(SolverError::NoConvergence { iterations, .. }) => assert_eq!(iterations, 5),
            other => panic!("unexpected {other:?}"),
        }
    }
}
