//! Oracles shared by the integration tests.

#![allow(dead_code)]

use biot_st::assembly::{assemble_loads, assemble_system, AssemblyOptions, MaterialParams, SystemMatrices};
use biot_st::linalg::SparseMatrix;
use biot_st::problems::ManufacturedCase;
use biot_st::spaces::{build_p_disc_space, build_q_space, FunctionSpace};
use biot_st::timeslab::{advance, Scheme, SchemeConfig, SlabState, SolverChoice, TimeProblem};
use nalgebra::{DMatrix, DVector};

/// Manufactured problem on a 2x2-cell unit square with `Q2/P1`, 4 slabs.
pub struct SmallProblem {
    pub case: ManufacturedCase,
    pub vspace: FunctionSpace,
    pub pspace: FunctionSpace,
    pub params: MaterialParams,
    pub mats: SystemMatrices,
}

impl SmallProblem {
    pub fn new() -> Self {
        let case = ManufacturedCase {
            base_cells: 2,
            t_final: 0.4,
            tau0: 0.1,
            ..ManufacturedCase::default()
        };
        let mesh = case.mesh(0).unwrap();
        let vspace = build_q_space(mesh.clone(), 2, 2).unwrap();
        let pspace = build_p_disc_space(mesh, 1).unwrap();
        let params = case.params(2).unwrap();
        let mats = assemble_system(&vspace, &pspace, &params, AssemblyOptions::default()).unwrap();
        Self {
            case,
            vspace,
            pspace,
            params,
            mats,
        }
    }

    pub fn initial(&self) -> SlabState {
        let c = self.case;
        SlabState {
            u: self.vspace.interpolate(|x| c.exact(x, 0.0).u.to_vec()).coeffs,
            v: self.vspace.interpolate(|x| c.exact(x, 0.0).v.to_vec()).coeffs,
            p: self.pspace.interpolate(|x| vec![c.exact(x, 0.0).p]).coeffs,
        }
    }

    /// End-of-slab states `[u; v; p]` of the space-time scheme.
    pub fn slab_ends(&self, scheme: Scheme, k: usize) -> Vec<Vec<f64>> {
        let data = self.case.data();
        let problem = TimeProblem {
            vspace: &self.vspace,
            pspace: &self.pspace,
            params: &self.params,
            matrices: &self.mats,
            data: &data,
        };
        let config = SchemeConfig::new(scheme, k, self.case.n_slabs(0), self.case.t_final).unwrap();
        let traj = advance(&config, &self.initial(), &problem, SolverChoice::Direct).unwrap();
        traj.slabs
            .iter()
            .map(|s| {
                let e = s.end_state();
                e.u.iter().chain(&e.v).chain(&e.p).copied().collect()
            })
            .collect()
    }

    /// One-step theta method for `S x' + K x = L(t)` with dense LU;
    /// `theta = 1` is backward Euler and `theta = 1/2` the trapezoid rule.
    pub fn theta_scheme(&self, theta: f64) -> Vec<Vec<f64>> {
        let (nu, np) = (self.vspace.total_dofs(), self.pspace.total_dofs());
        let n = 2 * nu + np;
        let n_steps = self.case.n_slabs(0);
        let tau = self.case.t_final / n_steps as f64;
        let mats = &self.mats;
        let (m, rm, cm) = (dense(&mats.mass_vec), dense(&mats.mass_u), dense(&mats.mass_p));
        let (a, c, b) = (dense(&mats.a), dense(&mats.c), dense(&mats.b));
        let mut sm = DMatrix::zeros(n, n);
        let mut km = DMatrix::zeros(n, n);
        sm.view_mut((0, 0), (nu, nu)).copy_from(&m);
        sm.view_mut((nu, nu), (nu, nu)).copy_from(&rm);
        sm.view_mut((2 * nu, 2 * nu), (np, np)).copy_from(&cm);
        km.view_mut((0, nu), (nu, nu)).copy_from(&(-&m));
        km.view_mut((nu, 0), (nu, nu)).copy_from(&a);
        km.view_mut((nu, 2 * nu), (nu, np)).copy_from(&c);
        km.view_mut((2 * nu, nu), (np, nu)).copy_from(&(-c.transpose()));
        km.view_mut((2 * nu, 2 * nu), (np, np)).copy_from(&b);
        let data = self.case.data();
        let load = |t: f64| {
            let (f, g) = assemble_loads(&self.vspace, &self.pspace, &self.params, &data, t).unwrap();
            let mut l = DVector::zeros(n);
            l.rows_mut(nu, nu).copy_from(&DVector::from_vec(f));
            l.rows_mut(2 * nu, np).copy_from(&DVector::from_vec(g));
            l
        };
        let lhs = (&sm + &km * (theta * tau)).lu();
        let x0 = self.initial();
        let mut x = DVector::from_iterator(n, x0.u.iter().chain(&x0.v).chain(&x0.p).copied());
        let mut out = Vec::new();
        for step in 0..n_steps {
            let (t0, t1) = (step as f64 * tau, (step + 1) as f64 * tau);
            let rhs = &sm * &x - &km * &x * ((1.0 - theta) * tau) + (load(t1) * theta + load(t0) * (1.0 - theta)) * tau;
            x = lhs.solve(&rhs).expect("nonsingular step matrix");
            out.push(x.iter().copied().collect());
        }
        out
    }
}

pub fn dense(m: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        let (cols, vals) = m.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            d[(i, j)] += v;
        }
    }
    d
}

/// Largest per-DOF difference between two trajectories of end states.
pub fn max_trajectory_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Fourth-order central difference of `f` in coordinate `i`.
pub fn d1(f: &dyn Fn([f64; 3]) -> f64, z: [f64; 3], i: usize, h: f64) -> f64 {
    let at = |s: f64| {
        let mut y = z;
        y[i] += s;
        f(y)
    };
    (-at(2.0 * h) + 8.0 * at(h) - 8.0 * at(-h) + at(-2.0 * h)) / (12.0 * h)
}

/// Fourth-order second difference in coordinates `i`, `j`.
pub fn d2(f: &dyn Fn([f64; 3]) -> f64, z: [f64; 3], i: usize, j: usize, h: f64) -> f64 {
    if i == j {
        let at = |s: f64| {
            let mut y = z;
            y[i] += s;
            f(y)
        };
        (-at(2.0 * h) + 16.0 * at(h) - 30.0 * at(0.0) + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h)
    } else {
        let g = |y: [f64; 3]| d1(f, y, j, h);
        d1(&g, z, i, h)
    }
}

/// Largest strong-form residual of the manufactured sources at `points`
/// `(x, y, t)`, with all derivatives of the exact fields by finite differences.
pub fn manufactured_residual(case: &ManufacturedCase, points: &[[f64; 3]]) -> f64 {
    let (e, nu) = (case.youngs, case.poisson);
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    let h = 1e-3;
    let u0 = |y: [f64; 3]| case.exact([y[0], y[1]], y[2]).u[0];
    let u1 = |y: [f64; 3]| case.exact([y[0], y[1]], y[2]).u[1];
    let p = |y: [f64; 3]| case.exact([y[0], y[1]], y[2]).p;
    let u: [&dyn Fn([f64; 3]) -> f64; 2] = [&u0, &u1];
    let mut worst: f64 = 0.0;
    for &z in points {
        let (f, g) = case.sources([z[0], z[1]], z[2]);
        for a in 0..2 {
            let mut div_sigma = 0.0;
            for b in 0..2 {
                div_sigma += mu * (d2(u[a], z, b, b, h) + d2(u[b], z, a, b, h));
                div_sigma += lambda * d2(u[b], z, b, a, h);
            }
            let res = case.rho * d2(u[a], z, 2, 2, h) - div_sigma + case.alpha * d1(&p, z, a, h) - case.rho * f[a];
            worst = worst.max(res.abs());
        }
        let div_ut = d2(u[0], z, 0, 2, h) + d2(u[1], z, 1, 2, h);
        let lap_p = d2(&p, z, 0, 0, h) + d2(&p, z, 1, 1, h);
        let res = case.c0 * d1(&p, z, 2, h) + case.alpha * div_ut - case.k * lap_p - g;
        worst = worst.max(res.abs());
    }
    worst
}
