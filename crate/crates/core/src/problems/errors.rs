//! Space-time error norms and experimental orders of convergence.

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, TensorRule};
use crate::spaces::{FunctionSpace, Tabulation};
use crate::timeslab::{Field, SlabSolution, Trajectory};

use super::manufactured::{ExactFields, ManufacturedCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormKind {
    /// `||grad(u - u_h)||` in `L2(L2)`.
    GradU,
    /// `||v - v_h||` in `L2(L2)`.
    V,
    /// `||p - p_h||` in `L2(L2)`.
    P,
}

/// Squared spatial errors `[|grad e_u|^2, |e_v|^2, |e_p|^2]` at one instant.
pub struct SpatialErrors<'a> {
    vspace: &'a FunctionSpace,
    pspace: &'a FunctionSpace,
    rule: TensorRule,
    vtab: Tabulation,
    ptab: Tabulation,
}

impl<'a> SpatialErrors<'a> {
    /// Tensor Gauss rule with `r + 2` points per direction (degree `2r + 3`).
    pub fn new(vspace: &'a FunctionSpace, pspace: &'a FunctionSpace) -> Self {
        let r = vspace.element().degree;
        let rule = TensorRule::gauss(r + 2).expect("valid rule size");
        let vtab = vspace.element().tabulate(&rule.points);
        let ptab = pspace.element().tabulate(&rule.points);
        Self {
            vspace,
            pspace,
            rule,
            vtab,
            ptab,
        }
    }

    pub fn squared(
        &self,
        u: &[f64],
        v: &[f64],
        p: &[f64],
        exact: impl Fn([f64; 2]) -> ExactFields,
    ) -> [f64; 3] {
        let mesh = self.vspace.mesh();
        let mut acc = [0.0; 3];
        for cell in 0..mesh.n_cells() {
            let geo = mesh.cell_geometry(cell);
            let det = geo.det_jacobian();
            let inv = geo.inverse_jacobian();
            let vd = self.vspace.cell_dofs(cell);
            let pd = self.pspace.cell_dofs(cell);
            for (q, &wq) in self.rule.weights.iter().enumerate() {
                let ex = exact(geo.map(self.rule.points[q]));
                let w = wq * det;
                let vals = self.vtab.values_at(q);
                let grads = self.vtab.grads_at(q);
                for c in 0..2 {
                    let (mut gu, mut vv) = ([0.0; 2], 0.0);
                    for (i, &s) in vd.iter().enumerate() {
                        let dof = self.vspace.dof(c, s);
                        gu[0] += u[dof] * grads[i][0] * inv[0];
                        gu[1] += u[dof] * grads[i][1] * inv[1];
                        vv += v[dof] * vals[i];
                    }
                    acc[0] += w * ((gu[0] - ex.grad_u[c][0]).powi(2) + (gu[1] - ex.grad_u[c][1]).powi(2));
                    acc[1] += w * (vv - ex.v[c]).powi(2);
                }
                let pv: f64 = pd.iter().zip(self.ptab.values_at(q)).map(|(&d, b)| p[d] * b).sum();
                acc[2] += w * (pv - ex.p).powi(2);
            }
        }
        acc
    }
}

/// Accumulates `L2(L2)` errors slab by slab with a `k + 3` point Gauss rule
/// in time.
pub struct ErrorAccumulator<'a> {
    spatial: SpatialErrors<'a>,
    case: ManufacturedCase,
    time_points: usize,
    sums: [f64; 3],
}

impl<'a> ErrorAccumulator<'a> {
    pub fn new(vspace: &'a FunctionSpace, pspace: &'a FunctionSpace, case: ManufacturedCase, k: usize) -> Self {
        Self {
            spatial: SpatialErrors::new(vspace, pspace),
            case,
            time_points: k + 3,
            sums: [0.0; 3],
        }
    }

    pub fn add_slab(&mut self, slab: &SlabSolution) {
        let rule = gauss_legendre(self.time_points).expect("valid rule size");
        let half = 0.5 * (slab.t_end - slab.t_start);
        for (&x, &w) in rule.points.iter().zip(&rule.weights) {
            let t = slab.t_start + (x + 1.0) * half;
            let u = slab.eval(Field::U, t);
            let v = slab.eval(Field::V, t);
            let p = slab.eval(Field::P, t);
            let e = self.spatial.squared(&u, &v, &p, |y| self.case.exact(y, t));
            for i in 0..3 {
                self.sums[i] += w * half * e[i];
            }
        }
    }

    /// `[grad u, v, p]` errors.
    pub fn errors(&self) -> [f64; 3] {
        self.sums.map(f64::sqrt)
    }
}

/// `L2(L2)` error of one field of a recorded trajectory.
pub fn l2l2_error(
    traj: &Trajectory,
    vspace: &FunctionSpace,
    pspace: &FunctionSpace,
    case: &ManufacturedCase,
    kind: NormKind,
) -> Result<f64> {
    if traj.slabs.len() != traj.config.n_slabs {
        return Err(Error::invalid("trajectory does not hold the slab solutions"));
    }
    let mut acc = ErrorAccumulator::new(vspace, pspace, *case, traj.config.k);
    for s in &traj.slabs {
        acc.add_slab(s);
    }
    let e = acc.errors();
    Ok(match kind {
        NormKind::GradU => e[0],
        NormKind::V => e[1],
        NormKind::P => e[2],
    })
}

/// `log2(e_{j-1} / e_j)` for consecutive entries.
pub fn eoc(errors: &[f64]) -> Result<Vec<f64>> {
    if errors.len() < 2 {
        return Err(Error::invalid("need at least two error values"));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0)) {
        return Err(Error::invalid(format!("errors must be positive, got {e}")));
    }
    Ok(errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect())
}
