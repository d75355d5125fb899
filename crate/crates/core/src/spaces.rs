//! Reference elements and global DOF maps for the continuous `Q_r` space
//! (displacement, velocity) and the broken `P_{r-1}` space (pressure).
//!
//! Numbering conventions:
//! - `Q_r` local nodes are the tensor Gauss-Lobatto points, numbered
//!   `i + (r + 1) * j` with `i` running along `x`.
//! - `Q_r` global scalar DOFs are numbered by mesh entity: vertices, then
//!   edge-interior nodes (per face, along the face's vertex order), then
//!   cell-interior nodes.
//! - Vector spaces use blocked numbering: `dof = component * n_scalar + s`.
//! - The broken `P_k` basis is the `L^2(-1,1)^2`-orthonormal Legendre
//!   product basis `P_a(xi) P_b(eta)`, `a + b <= k`, in graded order, which is
//!   the Gram-Schmidt orthonormalization of the graded monomials.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{DisplacementTag, LocalFace, Mesh};
use crate::quadrature::{gauss_legendre, gauss_lobatto, legendre, TensorRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementFamily {
    TensorLagrangeQ,
    BrokenP,
}

#[derive(Debug, Clone)]
pub struct ReferenceElement {
    pub family: ElementFamily,
    pub degree: usize,
    nodes_1d: Vec<f64>,
    modes: Vec<(usize, usize)>,
}

/// Basis values and reference gradients at a set of points, stored point-major.
#[derive(Debug, Clone)]
pub struct Tabulation {
    pub n_points: usize,
    pub n_basis: usize,
    pub values: Vec<f64>,
    pub grads: Vec<[f64; 2]>,
}

impl Tabulation {
    pub fn value(&self, q: usize, i: usize) -> f64 {
        self.values[q * self.n_basis + i]
    }

    pub fn grad(&self, q: usize, i: usize) -> [f64; 2] {
        self.grads[q * self.n_basis + i]
    }

    pub fn values_at(&self, q: usize) -> &[f64] {
        &self.values[q * self.n_basis..(q + 1) * self.n_basis]
    }

    pub fn grads_at(&self, q: usize) -> &[[f64; 2]] {
        &self.grads[q * self.n_basis..(q + 1) * self.n_basis]
    }
}

fn lagrange_1d(nodes: &[f64], i: usize, x: f64) -> (f64, f64) {
    let xi = nodes[i];
    let mut value = 1.0;
    let mut deriv = 0.0;
    for (m, &xm) in nodes.iter().enumerate() {
        if m == i {
            continue;
        }
        let factor = (x - xm) / (xi - xm);
        deriv = deriv * factor + value / (xi - xm);
        value *= factor;
    }
    (value, deriv)
}

impl ReferenceElement {
    /// Tensor Lagrange element of degree `r >= 1` on Gauss-Lobatto nodes.
    pub fn lagrange_q(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::invalid("Q_r needs r >= 1"));
        }
        Ok(Self {
            family: ElementFamily::TensorLagrangeQ,
            degree: r,
            nodes_1d: gauss_lobatto(r + 1)?.points,
            modes: Vec::new(),
        })
    }

    /// Total-degree polynomials of degree `k` with the orthonormal Legendre basis.
    pub fn broken_p(k: usize) -> Self {
        let mut modes = Vec::new();
        for s in 0..=k {
            for b in 0..=s {
                modes.push((s - b, b));
            }
        }
        Self {
            family: ElementFamily::BrokenP,
            degree: k,
            nodes_1d: Vec::new(),
            modes,
        }
    }

    pub fn n_local(&self) -> usize {
        match self.family {
            ElementFamily::TensorLagrangeQ => (self.degree + 1).pow(2),
            ElementFamily::BrokenP => self.modes.len(),
        }
    }

    pub fn nodes_1d(&self) -> &[f64] {
        &self.nodes_1d
    }

    /// Reference coordinates of Lagrange node `i`.
    pub fn node(&self, i: usize) -> [f64; 2] {
        let n = self.degree + 1;
        [self.nodes_1d[i % n], self.nodes_1d[i / n]]
    }

    /// Values and reference gradients of all local basis functions at `xi`.
    pub fn eval(&self, xi: [f64; 2], values: &mut [f64], grads: &mut [[f64; 2]]) {
        match self.family {
            ElementFamily::TensorLagrangeQ => {
                let n = self.degree + 1;
                let lx: Vec<_> = (0..n).map(|i| lagrange_1d(&self.nodes_1d, i, xi[0])).collect();
                let ly: Vec<_> = (0..n).map(|j| lagrange_1d(&self.nodes_1d, j, xi[1])).collect();
                for j in 0..n {
                    for i in 0..n {
                        let k = i + n * j;
                        values[k] = lx[i].0 * ly[j].0;
                        grads[k] = [lx[i].1 * ly[j].0, lx[i].0 * ly[j].1];
                    }
                }
            }
            ElementFamily::BrokenP => {
                let px: Vec<_> = (0..=self.degree).map(|a| legendre(a, xi[0])).collect();
                let py: Vec<_> = (0..=self.degree).map(|b| legendre(b, xi[1])).collect();
                for (k, &(a, b)) in self.modes.iter().enumerate() {
                    let scale = (((2 * a + 1) * (2 * b + 1)) as f64).sqrt() / 2.0;
                    values[k] = scale * px[a].0 * py[b].0;
                    grads[k] = [scale * px[a].1 * py[b].0, scale * px[a].0 * py[b].1];
                }
            }
        }
    }

    pub fn tabulate(&self, points: &[[f64; 2]]) -> Tabulation {
        let n = self.n_local();
        let mut values = vec![0.0; n * points.len()];
        let mut grads = vec![[0.0; 2]; n * points.len()];
        for (q, &p) in points.iter().enumerate() {
            self.eval(p, &mut values[q * n..(q + 1) * n], &mut grads[q * n..(q + 1) * n]);
        }
        Tabulation {
            n_points: points.len(),
            n_basis: n,
            values,
            grads,
        }
    }

    /// Local Lagrange nodes lying on a face, ordered along the face parameter.
    pub fn face_nodes(&self, face: LocalFace) -> Vec<usize> {
        let n = self.degree + 1;
        (0..n)
            .map(|s| match face {
                LocalFace::Bottom => s,
                LocalFace::Top => s + n * (n - 1),
                LocalFace::Left => n * s,
                LocalFace::Right => n - 1 + n * s,
            })
            .collect()
    }
}

/// Set of constrained DOFs with prescribed values.
pub type ConstraintSet = BTreeMap<usize, f64>;

#[derive(Debug, Clone)]
pub struct FunctionSpace {
    mesh: Arc<Mesh>,
    element: ReferenceElement,
    components: usize,
    cell_dofs: Vec<Vec<usize>>,
    n_scalar: usize,
    node_points: Vec<[f64; 2]>,
    constraints: ConstraintSet,
}

/// Continuous `Q_r` space with `components` components (1 or 2), `r >= 2`.
pub fn build_q_space(mesh: Arc<Mesh>, r: usize, components: usize) -> Result<FunctionSpace> {
    if r < 2 {
        return Err(Error::invalid(format!("Q_r space needs r >= 2, got {r}")));
    }
    if !(1..=2).contains(&components) {
        return Err(Error::invalid("components must be 1 or 2"));
    }
    let element = ReferenceElement::lagrange_q(r)?;
    let n = r + 1;
    let nv = mesh.vertices.len();
    let nf = mesh.faces.len();
    let edge_base = nv;
    let interior_base = nv + nf * (r - 1);
    let n_scalar = interior_base + mesh.n_cells() * (r - 1) * (r - 1);
    let mut node_points = vec![[0.0; 2]; n_scalar];
    let mut cell_dofs = Vec::with_capacity(mesh.n_cells());

    for (c, cell) in mesh.cells.iter().enumerate() {
        let faces = mesh.cell_faces[c];
        let geo = mesh.cell_geometry(c);
        // edge dof at position `p` (1..r-1) counted from local vertex `from`
        let edge_dof = |lf: LocalFace, from: usize, p: usize| {
            let f = faces[lf as usize];
            let along = if mesh.faces[f].vertices[0] == cell[from] {
                p - 1
            } else {
                r - 1 - p
            };
            edge_base + f * (r - 1) + along
        };
        let mut dofs = vec![0usize; n * n];
        for j in 0..n {
            for i in 0..n {
                let dof = match (i, j) {
                    (0, 0) => cell[0],
                    (i, 0) if i == r => cell[1],
                    (i, j) if i == r && j == r => cell[2],
                    (0, j) if j == r => cell[3],
                    (i, 0) => edge_dof(LocalFace::Bottom, 0, i),
                    (i, j) if j == r => edge_dof(LocalFace::Top, 3, i),
                    (0, j) => edge_dof(LocalFace::Left, 0, j),
                    (i, j) if i == r => edge_dof(LocalFace::Right, 1, j),
                    (i, j) => interior_base + c * (r - 1) * (r - 1) + (i - 1) + (r - 1) * (j - 1),
                };
                dofs[i + n * j] = dof;
                node_points[dof] = geo.map(element.node(i + n * j));
            }
        }
        cell_dofs.push(dofs);
    }
    Ok(FunctionSpace {
        mesh,
        element,
        components,
        cell_dofs,
        n_scalar,
        node_points,
        constraints: ConstraintSet::new(),
    })
}

/// Broken total-degree `P_degree` space, `degree >= 1`.
pub fn build_p_disc_space(mesh: Arc<Mesh>, degree: usize) -> Result<FunctionSpace> {
    if degree < 1 {
        return Err(Error::invalid("broken P space needs degree >= 1"));
    }
    Ok(broken_space(mesh, degree, 1))
}

fn broken_space(mesh: Arc<Mesh>, degree: usize, components: usize) -> FunctionSpace {
    let element = ReferenceElement::broken_p(degree);
    let m = element.n_local();
    let cell_dofs = (0..mesh.n_cells())
        .map(|c| (c * m..(c + 1) * m).collect())
        .collect();
    FunctionSpace {
        n_scalar: mesh.n_cells() * m,
        mesh,
        element,
        components,
        cell_dofs,
        node_points: Vec::new(),
        constraints: ConstraintSet::new(),
    }
}

/// Basis values and physical gradients on one cell, point-major.
#[derive(Debug, Clone)]
pub struct BasisValues {
    pub values: Vec<Vec<f64>>,
    pub grads: Vec<Vec<[f64; 2]>>,
}

impl FunctionSpace {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn element(&self) -> &ReferenceElement {
        &self.element
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_continuous(&self) -> bool {
        self.element.family == ElementFamily::TensorLagrangeQ
    }

    pub fn n_scalar_dofs(&self) -> usize {
        self.n_scalar
    }

    pub fn total_dofs(&self) -> usize {
        self.components * self.n_scalar
    }

    /// Scalar DOFs of a cell in local basis order.
    pub fn cell_dofs(&self, cell: usize) -> &[usize] {
        &self.cell_dofs[cell]
    }

    pub fn dof(&self, component: usize, scalar: usize) -> usize {
        component * self.n_scalar + scalar
    }

    /// Physical coordinates of the Lagrange node of each scalar DOF.
    pub fn node_points(&self) -> &[[f64; 2]] {
        &self.node_points
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn set_constraints(&mut self, constraints: ConstraintSet) {
        self.constraints = constraints;
    }

    pub fn eval_basis(&self, cell: usize, points: &[[f64; 2]]) -> Result<BasisValues> {
        const TOL: f64 = 1e-12;
        if cell >= self.mesh.n_cells() {
            return Err(Error::invalid(format!("cell {cell} out of range")));
        }
        if let Some(p) = points
            .iter()
            .find(|p| p.iter().any(|x| !(x.abs() <= 1.0 + TOL)))
        {
            return Err(Error::invalid(format!("reference point {p:?} outside [-1,1]^2")));
        }
        let inv = self.mesh.cell_geometry(cell).inverse_jacobian();
        let n = self.element.n_local();
        let mut out = BasisValues {
            values: Vec::with_capacity(points.len()),
            grads: Vec::with_capacity(points.len()),
        };
        for &p in points {
            let mut v = vec![0.0; n];
            let mut g = vec![[0.0; 2]; n];
            self.element.eval(p, &mut v, &mut g);
            for gi in g.iter_mut() {
                *gi = [gi[0] * inv[0], gi[1] * inv[1]];
            }
            out.values.push(v);
            out.grads.push(g);
        }
        Ok(out)
    }

    /// Nodal interpolation (continuous spaces) or cellwise `L^2` projection
    /// (broken spaces) of `field`, which returns one value per component.
    pub fn interpolate(&self, field: impl Fn([f64; 2]) -> Vec<f64>) -> FEFunction<'_> {
        let mut coeffs = vec![0.0; self.total_dofs()];
        match self.element.family {
            ElementFamily::TensorLagrangeQ => {
                for (s, &x) in self.node_points.iter().enumerate() {
                    let v = field(x);
                    for c in 0..self.components {
                        coeffs[self.dof(c, s)] = v[c];
                    }
                }
            }
            ElementFamily::BrokenP => {
                let rule = TensorRule::gauss(self.element.degree + 3).expect("valid rule size");
                let tab = self.element.tabulate(&rule.points);
                for cell in 0..self.mesh.n_cells() {
                    let geo = self.mesh.cell_geometry(cell);
                    let samples: Vec<Vec<f64>> =
                        rule.points.iter().map(|&p| field(geo.map(p))).collect();
                    for (i, &s) in self.cell_dofs[cell].iter().enumerate() {
                        for c in 0..self.components {
                            coeffs[self.dof(c, s)] = (0..rule.points.len())
                                .map(|q| rule.weights[q] * samples[q][c] * tab.value(q, i))
                                .sum();
                        }
                    }
                }
            }
        }
        FEFunction {
            space: self,
            coeffs,
        }
    }

    pub fn zero(&self) -> FEFunction<'_> {
        FEFunction {
            space: self,
            coeffs: vec![0.0; self.total_dofs()],
        }
    }

    pub fn function(&self, coeffs: Vec<f64>) -> Result<FEFunction<'_>> {
        if coeffs.len() != self.total_dofs() {
            return Err(Error::invalid(format!(
                "coefficient vector has length {}, space has {} DOFs",
                coeffs.len(),
                self.total_dofs()
            )));
        }
        Ok(FEFunction {
            space: self,
            coeffs,
        })
    }
}

/// Strong roller constraints on the faces tagged `tag`: the component of
/// every face node along the face normal is fixed to zero.
pub fn mark_directional_constraints(
    space: &FunctionSpace,
    tag: DisplacementTag,
) -> Result<ConstraintSet> {
    if space.components != 2 || !space.is_continuous() {
        return Err(Error::invalid(
            "directional constraints need a continuous vector space",
        ));
    }
    let mut set = ConstraintSet::new();
    for (_, face) in space.mesh.boundary_faces().filter(|(_, f)| f.u_tag == tag) {
        let n = face.normal;
        let component = if n[1] == 0.0 && n[0].abs() == 1.0 {
            0
        } else if n[0] == 0.0 && n[1].abs() == 1.0 {
            1
        } else {
            return Err(Error::invalid(format!(
                "directional face with normal {n:?} is not axis-aligned"
            )));
        };
        let (cell, lf) = face.owner;
        for i in space.element.face_nodes(lf) {
            set.insert(space.dof(component, space.cell_dofs[cell][i]), 0.0);
        }
    }
    Ok(set)
}

/// A discrete field: coefficient vector over a function space.
#[derive(Debug, Clone)]
pub struct FEFunction<'a> {
    pub space: &'a FunctionSpace,
    pub coeffs: Vec<f64>,
}

impl FEFunction<'_> {
    /// Component values at reference point `xi` of `cell`.
    pub fn value(&self, cell: usize, xi: [f64; 2]) -> Vec<f64> {
        let el = &self.space.element;
        let n = el.n_local();
        let mut v = vec![0.0; n];
        let mut g = vec![[0.0; 2]; n];
        el.eval(xi, &mut v, &mut g);
        let dofs = &self.space.cell_dofs[cell];
        (0..self.space.components)
            .map(|c| {
                dofs.iter()
                    .zip(&v)
                    .map(|(&d, &b)| self.coeffs[self.space.dof(c, d)] * b)
                    .sum()
            })
            .collect()
    }

    /// Physical gradients of every component at reference point `xi`.
    pub fn gradient(&self, cell: usize, xi: [f64; 2]) -> Vec<[f64; 2]> {
        let el = &self.space.element;
        let n = el.n_local();
        let mut v = vec![0.0; n];
        let mut g = vec![[0.0; 2]; n];
        el.eval(xi, &mut v, &mut g);
        let inv = self.space.mesh.cell_geometry(cell).inverse_jacobian();
        let dofs = &self.space.cell_dofs[cell];
        (0..self.space.components)
            .map(|c| {
                let mut acc = [0.0; 2];
                for (&d, gi) in dofs.iter().zip(&g) {
                    let w = self.coeffs[self.space.dof(c, d)];
                    acc[0] += w * gi[0] * inv[0];
                    acc[1] += w * gi[1] * inv[1];
                }
                acc
            })
            .collect()
    }
}

/// Number of Gauss points per direction used for spatial integration of a
/// `Q_r` / `P_{r-1}` pair.
pub fn assembly_points(r: usize) -> usize {
    r + 1
}

/// One-dimensional Gauss rule used on faces.
pub fn face_rule(r: usize) -> crate::quadrature::QuadRule {
    gauss_legendre(assembly_points(r)).expect("valid rule size")
}
