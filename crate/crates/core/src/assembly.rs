//! Sparse matrices and load vectors of the spatial forms.
//!
//! Notation: `V` is the continuous vector space (displacement and velocity),
//! `Q` the broken pressure space. Matrix rows are test functions, columns
//! trial functions.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::linalg::{SparseMatrix, TripletBuilder};
use crate::mesh::{DisplacementTag, Face, LocalFace, PressureTag};
use crate::quadrature::TensorRule;
use crate::spaces::{assembly_points, face_rule, FunctionSpace, Tabulation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub rho: f64,
    pub alpha: f64,
    pub c0: f64,
    /// Permeability tensor.
    pub permeability: [[f64; 2]; 2],
    pub lambda: f64,
    pub mu: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
}

/// Lamé parameters from Young's modulus and Poisson ratio.
pub fn lame_from_e_nu(e: f64, nu: f64) -> Result<(f64, f64)> {
    if !(e > 0.0) || !(0.0..0.5).contains(&nu) {
        return Err(Error::invalid(format!(
            "need E > 0 and 0 <= nu < 0.5, got E = {e}, nu = {nu}"
        )));
    }
    let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
    let mu = e / (2.0 * (1.0 + nu));
    Ok((lambda, mu))
}

/// Default Nitsche and interior penalty coefficients for degree `r`.
pub fn default_penalties(r: usize) -> (f64, f64) {
    let r = r as f64;
    (5e4 * r * (r + 1.0), 0.5 * r * (r - 1.0))
}

impl MaterialParams {
    /// Isotropic material with scalar permeability and default penalties.
    pub fn isotropic(rho: f64, alpha: f64, c0: f64, k: f64, e: f64, nu: f64, r: usize) -> Result<Self> {
        let (lambda, mu) = lame_from_e_nu(e, nu)?;
        let (gamma_a, gamma_b) = default_penalties(r);
        let p = Self {
            rho,
            alpha,
            c0,
            permeability: [[k, 0.0], [0.0, k]],
            lambda,
            mu,
            gamma_a,
            gamma_b,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.permeability;
        let tr = k[0][0] + k[1][1];
        let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
        let checks = [
            (self.rho > 0.0, "rho > 0"),
            (self.alpha > 0.0, "alpha > 0"),
            (self.c0 > 0.0, "c0 > 0"),
            (self.mu > 0.0, "mu > 0"),
            (self.lambda >= 0.0, "lambda >= 0"),
            (k[0][1] == k[1][0] && tr > 0.0 && det > 0.0, "K symmetric positive definite"),
            (self.gamma_a > 0.0, "gamma_a > 0"),
            (self.gamma_b > 0.0, "gamma_b > 0"),
        ];
        match checks.iter().find(|(ok, _)| !ok) {
            Some((_, what)) => Err(Error::invalid(format!("material parameters violate {what}"))),
            None => Ok(()),
        }
    }

    fn k_grad(&self, g: [f64; 2]) -> [f64; 2] {
        let k = self.permeability;
        [k[0][0] * g[0] + k[0][1] * g[1], k[1][0] * g[0] + k[1][1] * g[1]]
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AssemblyOptions {
    /// Adds `alpha <chi.n, q>` on traction faces to the coupling form, i.e.
    /// treats the prescribed traction as acting on the effective stress only.
    pub effective_stress_neumann: bool,
}

/// All matrices of the semi-discrete system.
#[derive(Debug, Clone)]
pub struct SystemMatrices {
    /// `rho`-weighted vector mass.
    pub mass_u: SparseMatrix,
    /// Unweighted vector mass.
    pub mass_vec: SparseMatrix,
    /// `c0`-weighted pressure mass.
    pub mass_p: SparseMatrix,
    pub a: SparseMatrix,
    /// Rows: vector DOFs, columns: pressure DOFs.
    pub c: SparseMatrix,
    pub b: SparseMatrix,
}

pub fn assemble_system(
    vspace: &FunctionSpace,
    pspace: &FunctionSpace,
    params: &MaterialParams,
    opts: AssemblyOptions,
) -> Result<SystemMatrices> {
    let mass_vec = assemble_mass(vspace, 1.0)?;
    Ok(SystemMatrices {
        mass_u: mass_vec.scaled(params.rho),
        mass_vec,
        mass_p: assemble_mass(pspace, params.c0)?,
        a: assemble_elasticity(vspace, params)?,
        c: assemble_coupling(vspace, pspace, params, opts)?,
        b: assemble_pressure_sipg(pspace, params)?,
    })
}

/// Reference tabulation at the volume rule of a space.
struct VolumeData {
    rule: TensorRule,
    tab: Tabulation,
}

fn volume_data(space: &FunctionSpace, r: usize) -> VolumeData {
    let rule = TensorRule::gauss(assembly_points(r)).expect("valid rule size");
    let tab = space.element().tabulate(&rule.points);
    VolumeData { rule, tab }
}

/// Displacement degree `r` of the pair a space belongs to.
fn pair_degree(space: &FunctionSpace) -> usize {
    if space.is_continuous() {
        space.element().degree
    } else {
        space.element().degree + 1
    }
}

fn size_key(size: [f64; 2]) -> (u64, u64) {
    (size[0].to_bits(), size[1].to_bits())
}

/// Local DOF list of a cell, blocked by component.
fn local_dofs(space: &FunctionSpace, cell: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(space.components() * space.cell_dofs(cell).len());
    for c in 0..space.components() {
        out.extend(space.cell_dofs(cell).iter().map(|&s| space.dof(c, s)));
    }
    out
}

/// Mass matrix `weight * <w, chi>` (componentwise for vector spaces).
pub fn assemble_mass(space: &FunctionSpace, weight: f64) -> Result<SparseMatrix> {
    let vd = volume_data(space, pair_degree(space));
    let n = space.element().n_local();
    let nc = space.components();
    let mesh = space.mesh();
    let mut cache: HashMap<(u64, u64), Vec<f64>> = HashMap::new();
    let nd = space.total_dofs();
    let mut tb = TripletBuilder::with_capacity(nd, nd, mesh.n_cells() * (n * nc).pow(2));
    for cell in 0..mesh.n_cells() {
        let geo = mesh.cell_geometry(cell);
        let local = cache.entry(size_key(geo.size)).or_insert_with(|| {
            let det = geo.det_jacobian();
            let mut m = vec![0.0; (n * nc) * (n * nc)];
            for (q, &wq) in vd.rule.weights.iter().enumerate() {
                let v = vd.tab.values_at(q);
                let w = weight * wq * det;
                for i in 0..n {
                    for j in 0..n {
                        let val = w * v[i] * v[j];
                        for c in 0..nc {
                            m[(c * n + i) * (n * nc) + c * n + j] += val;
                        }
                    }
                }
            }
            m
        });
        let dofs = local_dofs(space, cell);
        tb.add_block(&dofs, &dofs, local);
    }
    Ok(tb.build())
}

fn check_vector_space(space: &FunctionSpace) -> Result<()> {
    if space.components() != 2 || !space.is_continuous() {
        return Err(Error::invalid("expected the continuous vector space"));
    }
    Ok(())
}

/// Traction `(C eps(phi e_d) n)_a` of a scalar basis function with physical
/// gradient `g` placed in component `d`.
#[inline]
fn traction(params: &MaterialParams, g: [f64; 2], d: usize, a: usize, n: [f64; 2]) -> f64 {
    let gn = g[0] * n[0] + g[1] * n[1];
    let delta = if a == d { 1.0 } else { 0.0 };
    params.mu * (delta * gn + n[d] * g[a]) + params.lambda * n[a] * g[d]
}

/// Face quadrature on the owner side: reference points and physical weights.
fn face_quadrature(face: &Face, lf: LocalFace, r: usize) -> (Vec<[f64; 2]>, Vec<f64>) {
    let rule = face_rule(r);
    let scale = 0.5 * face.measure;
    let pts = rule.points.iter().map(|&s| lf.reference_point(s)).collect();
    let w = rule.weights.iter().map(|w| w * scale).collect();
    (pts, w)
}

/// Elasticity form with Nitsche terms on the `u_dirichlet` faces.
pub fn assemble_elasticity(space: &FunctionSpace, params: &MaterialParams) -> Result<SparseMatrix> {
    check_vector_space(space)?;
    let r = space.element().degree;
    let vd = volume_data(space, r);
    let n = space.element().n_local();
    let nl = 2 * n;
    let mesh = space.mesh();
    let nd = space.total_dofs();
    let mut tb = TripletBuilder::with_capacity(nd, nd, mesh.n_cells() * nl * nl);
    let mut cache: HashMap<(u64, u64), Vec<f64>> = HashMap::new();
    let (mu, lambda) = (params.mu, params.lambda);
    for cell in 0..mesh.n_cells() {
        let geo = mesh.cell_geometry(cell);
        let local = cache.entry(size_key(geo.size)).or_insert_with(|| {
            let det = geo.det_jacobian();
            let inv = geo.inverse_jacobian();
            let mut m = vec![0.0; nl * nl];
            for (q, &wq) in vd.rule.weights.iter().enumerate() {
                let w = wq * det;
                let g: Vec<[f64; 2]> = vd
                    .tab
                    .grads_at(q)
                    .iter()
                    .map(|g| [g[0] * inv[0], g[1] * inv[1]])
                    .collect();
                for i in 0..n {
                    for j in 0..n {
                        let dot = g[i][0] * g[j][0] + g[i][1] * g[j][1];
                        for c in 0..2 {
                            for d in 0..2 {
                                let delta = if c == d { dot } else { 0.0 };
                                let val = mu * (delta + g[i][d] * g[j][c]) + lambda * g[i][c] * g[j][d];
                                m[(c * n + i) * nl + d * n + j] += w * val;
                            }
                        }
                    }
                }
            }
            m
        });
        let dofs = local_dofs(space, cell);
        tb.add_block(&dofs, &dofs, local);
    }
    for (_, face) in mesh.boundary_faces().filter(|(_, f)| f.u_tag == DisplacementTag::Dirichlet) {
        let (cell, lf) = face.owner;
        let (pts, wts) = face_quadrature(face, lf, r);
        let bv = space.eval_basis(cell, &pts)?;
        let nrm = face.normal;
        let pen = params.gamma_a / face.h_f;
        let mut m = vec![0.0; nl * nl];
        for (q, &w) in wts.iter().enumerate() {
            let (v, g) = (&bv.values[q], &bv.grads[q]);
            for i in 0..n {
                for j in 0..n {
                    for c in 0..2 {
                        for d in 0..2 {
                            let mut val = -traction(params, g[j], d, c, nrm) * v[i]
                                - traction(params, g[i], c, d, nrm) * v[j];
                            if c == d {
                                val += pen * v[i] * v[j];
                            }
                            m[(c * n + i) * nl + d * n + j] += w * val;
                        }
                    }
                }
            }
        }
        let dofs = local_dofs(space, cell);
        tb.add_block(&dofs, &dofs, &m);
    }
    Ok(tb.build())
}

fn check_same_mesh(a: &FunctionSpace, b: &FunctionSpace) -> Result<()> {
    if !std::sync::Arc::ptr_eq(a.mesh(), b.mesh()) {
        return Err(Error::invalid("spaces are defined on different meshes"));
    }
    Ok(())
}

/// Coupling form `-alpha <div chi, q> + alpha <chi.n, q>` on `u_dirichlet` faces.
pub fn assemble_coupling(
    vspace: &FunctionSpace,
    pspace: &FunctionSpace,
    params: &MaterialParams,
    opts: AssemblyOptions,
) -> Result<SparseMatrix> {
    check_vector_space(vspace)?;
    check_same_mesh(vspace, pspace)?;
    let r = vspace.element().degree;
    let rule = TensorRule::gauss(assembly_points(r)).expect("valid rule size");
    let vt = vspace.element().tabulate(&rule.points);
    let pt = pspace.element().tabulate(&rule.points);
    let n = vspace.element().n_local();
    let np = pspace.element().n_local();
    let mesh = vspace.mesh();
    let alpha = params.alpha;
    let mut tb = TripletBuilder::with_capacity(
        vspace.total_dofs(),
        pspace.total_dofs(),
        mesh.n_cells() * 2 * n * np,
    );
    let mut cache: HashMap<(u64, u64), Vec<f64>> = HashMap::new();
    for cell in 0..mesh.n_cells() {
        let geo = mesh.cell_geometry(cell);
        let local = cache.entry(size_key(geo.size)).or_insert_with(|| {
            let det = geo.det_jacobian();
            let inv = geo.inverse_jacobian();
            let mut m = vec![0.0; 2 * n * np];
            for (q, &wq) in rule.weights.iter().enumerate() {
                let w = wq * det;
                let g = vt.grads_at(q);
                let pv = pt.values_at(q);
                for i in 0..n {
                    for c in 0..2 {
                        let dchi = g[i][c] * inv[c];
                        for mm in 0..np {
                            m[(c * n + i) * np + mm] -= alpha * w * dchi * pv[mm];
                        }
                    }
                }
            }
            m
        });
        let rows = local_dofs(vspace, cell);
        let cols = local_dofs(pspace, cell);
        tb.add_block(&rows, &cols, local);
    }
    let on_face = |f: &Face| {
        f.u_tag == DisplacementTag::Dirichlet
            || (opts.effective_stress_neumann && f.u_tag == DisplacementTag::Neumann)
    };
    for (_, face) in mesh.boundary_faces().filter(|(_, f)| on_face(f)) {
        let (cell, lf) = face.owner;
        let (pts, wts) = face_quadrature(face, lf, r);
        let vb = vspace.eval_basis(cell, &pts)?;
        let pb = pspace.eval_basis(cell, &pts)?;
        let mut m = vec![0.0; 2 * n * np];
        for (q, &w) in wts.iter().enumerate() {
            for i in 0..n {
                for c in 0..2 {
                    let a = alpha * w * vb.values[q][i] * face.normal[c];
                    for mm in 0..np {
                        m[(c * n + i) * np + mm] += a * pb.values[q][mm];
                    }
                }
            }
        }
        tb.add_block(&local_dofs(vspace, cell), &local_dofs(pspace, cell), &m);
    }
    Ok(tb.build())
}

/// Symmetric interior penalty form for the pressure. Interior faces and
/// `p_dirichlet` faces carry consistency, symmetry and penalty terms; other
/// boundary faces carry none.
pub fn assemble_pressure_sipg(space: &FunctionSpace, params: &MaterialParams) -> Result<SparseMatrix> {
    if space.is_continuous() || space.components() != 1 {
        return Err(Error::invalid("expected the broken scalar pressure space"));
    }
    if !(params.gamma_b > 0.0) {
        return Err(Error::invalid(format!("gamma_b must be positive, got {}", params.gamma_b)));
    }
    let r = pair_degree(space);
    let vd = volume_data(space, r);
    let n = space.element().n_local();
    let mesh = space.mesh();
    let nd = space.total_dofs();
    let mut tb = TripletBuilder::with_capacity(nd, nd, mesh.n_cells() * n * n * 5);
    let mut cache: HashMap<(u64, u64), Vec<f64>> = HashMap::new();
    for cell in 0..mesh.n_cells() {
        let geo = mesh.cell_geometry(cell);
        let local = cache.entry(size_key(geo.size)).or_insert_with(|| {
            let det = geo.det_jacobian();
            let inv = geo.inverse_jacobian();
            let mut m = vec![0.0; n * n];
            for (q, &wq) in vd.rule.weights.iter().enumerate() {
                let g: Vec<[f64; 2]> = vd
                    .tab
                    .grads_at(q)
                    .iter()
                    .map(|g| [g[0] * inv[0], g[1] * inv[1]])
                    .collect();
                for i in 0..n {
                    for j in 0..n {
                        let kg = params.k_grad(g[j]);
                        m[i * n + j] += wq * det * (kg[0] * g[i][0] + kg[1] * g[i][1]);
                    }
                }
            }
            m
        });
        let dofs = local_dofs(space, cell);
        tb.add_block(&dofs, &dofs, local);
    }
    for face in &mesh.faces {
        let pen = params.gamma_b / face.h_f;
        let nrm = face.normal;
        let (c0, lf0) = face.owner;
        let (pts0, wts) = face_quadrature(face, lf0, r);
        let b0 = space.eval_basis(c0, &pts0)?;
        let kn = |g: [f64; 2]| {
            let kg = params.k_grad(g);
            kg[0] * nrm[0] + kg[1] * nrm[1]
        };
        match face.neighbor {
            Some((c1, lf1)) => {
                let pts1: Vec<[f64; 2]> = face_rule(r).points.iter().map(|&s| lf1.reference_point(s)).collect();
                let b1 = space.eval_basis(c1, &pts1)?;
                // jump sign +1 on the owner, -1 on the neighbor; average weight 1/2
                let sides = [(&b0, 1.0), (&b1, -1.0)];
                for (si, (bi, sgn_i)) in sides.iter().enumerate() {
                    for (sj, (bj, sgn_j)) in sides.iter().enumerate() {
                        let mut m = vec![0.0; n * n];
                        for (q, &w) in wts.iter().enumerate() {
                            for i in 0..n {
                                let (vi, gi) = (bi.values[q][i], kn(bi.grads[q][i]));
                                for j in 0..n {
                                    let (vj, gj) = (bj.values[q][j], kn(bj.grads[q][j]));
                                    m[i * n + j] += w
                                        * (-0.5 * gj * sgn_i * vi - 0.5 * gi * sgn_j * vj
                                            + pen * sgn_i * sgn_j * vi * vj);
                                }
                            }
                        }
                        let cell_i = if si == 0 { c0 } else { c1 };
                        let cell_j = if sj == 0 { c0 } else { c1 };
                        tb.add_block(space.cell_dofs(cell_i), space.cell_dofs(cell_j), &m);
                    }
                }
            }
            None if face.p_tag == PressureTag::Dirichlet => {
                let mut m = vec![0.0; n * n];
                for (q, &w) in wts.iter().enumerate() {
                    for i in 0..n {
                        let (vi, gi) = (b0.values[q][i], kn(b0.grads[q][i]));
                        for j in 0..n {
                            let (vj, gj) = (b0.values[q][j], kn(b0.grads[q][j]));
                            m[i * n + j] += w * (-gj * vi - gi * vj + pen * vi * vj);
                        }
                    }
                }
                tb.add_block(space.cell_dofs(c0), space.cell_dofs(c0), &m);
            }
            None => {}
        }
    }
    Ok(tb.build())
}

pub type VectorField = Box<dyn Fn([f64; 2], f64) -> [f64; 2] + Send + Sync>;
pub type ScalarField = Box<dyn Fn([f64; 2], f64) -> f64 + Send + Sync>;

/// Data functions of a problem, all as functions of `(x, t)`.
#[derive(Default)]
pub struct ProblemData {
    /// Body force `f`; the momentum load is `rho * f`.
    pub f: Option<VectorField>,
    pub g: Option<ScalarField>,
    pub u_d: Option<VectorField>,
    pub v_d: Option<VectorField>,
    pub t_n: Option<VectorField>,
    pub p_d: Option<ScalarField>,
    pub p_n: Option<ScalarField>,
}

impl std::fmt::Debug for ProblemData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let set = |b: bool| if b { "set" } else { "-" };
        f.debug_struct("ProblemData")
            .field("f", &set(self.f.is_some()))
            .field("g", &set(self.g.is_some()))
            .field("u_d", &set(self.u_d.is_some()))
            .field("v_d", &set(self.v_d.is_some()))
            .field("t_n", &set(self.t_n.is_some()))
            .field("p_d", &set(self.p_d.is_some()))
            .field("p_n", &set(self.p_n.is_some()))
            .finish()
    }
}

impl ProblemData {
    /// Every data function identically zero.
    pub fn homogeneous() -> Self {
        Self {
            f: Some(Box::new(|_, _| [0.0; 2])),
            g: Some(Box::new(|_, _| 0.0)),
            u_d: Some(Box::new(|_, _| [0.0; 2])),
            v_d: Some(Box::new(|_, _| [0.0; 2])),
            t_n: Some(Box::new(|_, _| [0.0; 2])),
            p_d: Some(Box::new(|_, _| 0.0)),
            p_n: Some(Box::new(|_, _| 0.0)),
        }
    }
}

fn require<'a, T: ?Sized>(field: &'a Option<Box<T>>, name: &'static str) -> Result<&'a T> {
    field.as_deref().ok_or(Error::MissingData(name))
}

/// Load vectors `(F, G)` at time `t`.
pub fn assemble_loads(
    vspace: &FunctionSpace,
    pspace: &FunctionSpace,
    params: &MaterialParams,
    data: &ProblemData,
    t: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_vector_space(vspace)?;
    check_same_mesh(vspace, pspace)?;
    let mesh = vspace.mesh();
    let r = vspace.element().degree;
    let f = require(&data.f, "f")?;
    let g = require(&data.g, "g")?;
    let has = |pred: &dyn Fn(&Face) -> bool| mesh.boundary_faces().any(|(_, fc)| pred(fc));
    let u_d = if has(&|fc| fc.u_tag == DisplacementTag::Dirichlet) {
        Some((require(&data.u_d, "u_D")?, require(&data.v_d, "v_D")?))
    } else {
        None
    };
    let t_n = if has(&|fc| fc.u_tag == DisplacementTag::Neumann) {
        Some(require(&data.t_n, "t_N")?)
    } else {
        None
    };
    let p_d = if has(&|fc| fc.p_tag == PressureTag::Dirichlet) {
        Some(require(&data.p_d, "p_D")?)
    } else {
        None
    };
    let p_n = if has(&|fc| fc.p_tag == PressureTag::Neumann) {
        Some(require(&data.p_n, "p_N")?)
    } else {
        None
    };

    let mut fv = vec![0.0; vspace.total_dofs()];
    let mut gv = vec![0.0; pspace.total_dofs()];
    let rule = TensorRule::gauss(assembly_points(r)).expect("valid rule size");
    let vt = vspace.element().tabulate(&rule.points);
    let pt = pspace.element().tabulate(&rule.points);
    let n = vspace.element().n_local();
    let np = pspace.element().n_local();
    for cell in 0..mesh.n_cells() {
        let geo = mesh.cell_geometry(cell);
        let det = geo.det_jacobian();
        let vdofs = vspace.cell_dofs(cell);
        let pdofs = pspace.cell_dofs(cell);
        for (q, &wq) in rule.weights.iter().enumerate() {
            let x = geo.map(rule.points[q]);
            let w = wq * det;
            let fx = f(x, t);
            let gx = g(x, t);
            let vv = vt.values_at(q);
            for i in 0..n {
                for c in 0..2 {
                    fv[vspace.dof(c, vdofs[i])] += w * params.rho * fx[c] * vv[i];
                }
            }
            let pv = pt.values_at(q);
            for m in 0..np {
                gv[pdofs[m]] += w * gx * pv[m];
            }
        }
    }
    for (_, face) in mesh.boundary_faces() {
        let (cell, lf) = face.owner;
        let (pts, wts) = face_quadrature(face, lf, r);
        let geo = mesh.cell_geometry(cell);
        let nrm = face.normal;
        let vdofs = vspace.cell_dofs(cell);
        let pdofs = pspace.cell_dofs(cell);
        let needs_v = matches!(face.u_tag, DisplacementTag::Dirichlet | DisplacementTag::Neumann);
        let needs_p = matches!(face.p_tag, PressureTag::Dirichlet | PressureTag::Neumann)
            || face.u_tag == DisplacementTag::Dirichlet;
        if !needs_v && !needs_p {
            continue;
        }
        let vb = vspace.eval_basis(cell, &pts)?;
        let pb = pspace.eval_basis(cell, &pts)?;
        for (q, &w) in wts.iter().enumerate() {
            let x = geo.map(pts[q]);
            let (v, gr) = (&vb.values[q], &vb.grads[q]);
            match face.u_tag {
                DisplacementTag::Dirichlet => {
                    let (ud_fn, vd_fn) = u_d.expect("checked above");
                    let ud = ud_fn(x, t);
                    let pen = params.gamma_a / face.h_f;
                    for i in 0..n {
                        for c in 0..2 {
                            let mut val = pen * ud[c] * v[i];
                            for d in 0..2 {
                                val -= ud[d] * traction(params, gr[i], c, d, nrm);
                            }
                            fv[vspace.dof(c, vdofs[i])] += w * val;
                        }
                    }
                    let vd = vd_fn(x, t);
                    let vn = vd[0] * nrm[0] + vd[1] * nrm[1];
                    for m in 0..np {
                        gv[pdofs[m]] -= w * params.alpha * vn * pb.values[q][m];
                    }
                }
                DisplacementTag::Neumann => {
                    let tn = t_n.expect("checked above")(x, t);
                    for i in 0..n {
                        for c in 0..2 {
                            fv[vspace.dof(c, vdofs[i])] -= w * tn[c] * v[i];
                        }
                    }
                }
                _ => {}
            }
            match face.p_tag {
                PressureTag::Dirichlet => {
                    let pd = p_d.expect("checked above")(x, t);
                    let pen = params.gamma_b / face.h_f;
                    for m in 0..np {
                        let kg = params.k_grad(pb.grads[q][m]);
                        let kn = kg[0] * nrm[0] + kg[1] * nrm[1];
                        gv[pdofs[m]] += w * pd * (pen * pb.values[q][m] - kn);
                    }
                }
                PressureTag::Neumann => {
                    let pn = p_n.expect("checked above")(x, t);
                    for m in 0..np {
                        gv[pdofs[m]] -= w * pn * pb.values[q][m];
                    }
                }
                PressureTag::Interior => {}
            }
        }
    }
    Ok((fv, gv))
}
