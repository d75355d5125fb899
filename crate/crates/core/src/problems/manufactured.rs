//! Smooth manufactured solution on the unit square used for convergence
//! studies.
//!
//! With `phi(x, t) = sin(w1 t^2) sin(w2 x) sin(w2 y)` the exact fields are
//! `u = phi (1, 1)`, `v = d_t u` and `p = phi`; the sources follow from the
//! strong form of the first-order system.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::assembly::{MaterialParams, ProblemData};
use crate::error::Result;
use crate::mesh::{refine_uniform, unit_square_mesh, Mesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    pub omega1: f64,
    pub omega2: f64,
    pub rho: f64,
    pub alpha: f64,
    pub c0: f64,
    /// Scalar permeability `K = k I`.
    pub k: f64,
    pub youngs: f64,
    pub poisson: f64,
    pub t_final: f64,
    /// Cells per side of the level-0 mesh.
    pub base_cells: usize,
    /// Level-0 time step.
    pub tau0: f64,
}

impl Default for ManufacturedCase {
    fn default() -> Self {
        Self {
            omega1: PI,
            omega2: PI,
            rho: 1.0,
            alpha: 0.9,
            c0: 0.01,
            k: 1.0,
            youngs: 100.0,
            poisson: 0.35,
            t_final: 2.0,
            base_cells: 4,
            tau0: 0.1,
        }
    }
}

/// Exact fields at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactFields {
    pub u: [f64; 2],
    pub v: [f64; 2],
    pub p: f64,
    /// `grad u`, row `c` is the gradient of component `c`.
    pub grad_u: [[f64; 2]; 2],
}

impl ManufacturedCase {
    pub fn params(&self, r: usize) -> Result<MaterialParams> {
        MaterialParams::isotropic(self.rho, self.alpha, self.c0, self.k, self.youngs, self.poisson, r)
    }

    /// Level-`level` mesh: `base_cells * 2^level` cells per side, all
    /// boundaries of Dirichlet type for both fields.
    pub fn mesh(&self, level: usize) -> Result<Arc<Mesh>> {
        let mut m = unit_square_mesh(self.base_cells)?;
        for _ in 0..level {
            m = refine_uniform(&m);
        }
        Ok(Arc::new(m))
    }

    pub fn n_slabs(&self, level: usize) -> usize {
        ((self.t_final / self.tau0).round() as usize) << level
    }

    fn time_factors(&self, t: f64) -> (f64, f64, f64) {
        let w = self.omega1;
        let s = (w * t * t).sin();
        let c = (w * t * t).cos();
        (s, 2.0 * w * t * c, 2.0 * w * c - 4.0 * w * w * t * t * s)
    }

    fn space_factors(&self, x: [f64; 2]) -> (f64, f64, f64, f64) {
        let w = self.omega2;
        let (sx, cx) = ((w * x[0]).sin(), (w * x[0]).cos());
        let (sy, cy) = ((w * x[1]).sin(), (w * x[1]).cos());
        // S, S_x, S_y, S_xy
        (sx * sy, w * cx * sy, w * sx * cy, w * w * cx * cy)
    }

    pub fn exact(&self, x: [f64; 2], t: f64) -> ExactFields {
        let (s, st, _) = self.time_factors(t);
        let (sp, sx, sy, _) = self.space_factors(x);
        let phi = s * sp;
        let g = [s * sx, s * sy];
        ExactFields {
            u: [phi, phi],
            v: [st * sp, st * sp],
            p: phi,
            grad_u: [g, g],
        }
    }

    /// Body force `f` (momentum load `rho f`) and pressure source `g`.
    pub fn sources(&self, x: [f64; 2], t: f64) -> ([f64; 2], f64) {
        let (lambda, mu) = crate::assembly::lame_from_e_nu(self.youngs, self.poisson)
            .expect("validated material");
        let (s, st, stt) = self.time_factors(t);
        let (sp, sx, sy, sxy) = self.space_factors(x);
        let w2 = self.omega2 * self.omega2;
        let phi = s * sp;
        let phi_xy = s * sxy;
        // div(C eps(u)) = mu lap u + (lambda + mu) grad div u, equal in both components
        let div_sigma = mu * (-2.0 * w2 * phi) + (lambda + mu) * (-w2 * phi + phi_xy);
        let grad_p = [s * sx, s * sy];
        let f = [
            stt * sp - (div_sigma - self.alpha * grad_p[0]) / self.rho,
            stt * sp - (div_sigma - self.alpha * grad_p[1]) / self.rho,
        ];
        let g = self.c0 * st * sp + self.alpha * st * (sx + sy) + 2.0 * self.k * w2 * phi;
        (f, g)
    }

    /// Data functions: sources plus exact Dirichlet data on the boundary.
    pub fn data(&self) -> ProblemData {
        let (a, b, c, d, e) = (*self, *self, *self, *self, *self);
        ProblemData {
            f: Some(Box::new(move |x, t| a.sources(x, t).0)),
            g: Some(Box::new(move |x, t| b.sources(x, t).1)),
            u_d: Some(Box::new(move |x, t| c.exact(x, t).u)),
            v_d: Some(Box::new(move |x, t| d.exact(x, t).v)),
            p_d: Some(Box::new(move |x, t| e.exact(x, t).p)),
            t_n: None,
            p_n: None,
        }
    }
}
