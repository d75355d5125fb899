//! Space-time slab systems for discontinuous (dG) and continuous (cG)
//! Galerkin time discretizations and the time marching loop.
//!
//! On each slab the fields are polynomials of degree `k` in time, written in
//! the Lagrange basis at the slab's quadrature nodes: right Gauss-Radau points
//! for dG, Gauss-Lobatto points for cG. Unknown vectors of a slab system are
//! blocked by field (u, then v, then p) and by time node within each field.

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use crate::assembly::{assemble_loads, MaterialParams, ProblemData, SystemMatrices};
use crate::error::{Error, Result, SolverError};
use crate::linalg::{
    solve_gmres, BlockSystem, DirectSolver, GmresOptions, Ilu0, SparseMatrix,
};
use crate::quadrature::{gauss_lobatto, gauss_radau_right};
use crate::spaces::{ConstraintSet, FunctionSpace};

mod modal;
use modal::ModalSolver;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    DG,
    CG,
}

impl Scheme {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dg" => Some(Scheme::DG),
            "cg" => Some(Scheme::CG),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::DG => "dG",
            Scheme::CG => "cG",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub k: usize,
    pub n_slabs: usize,
    pub t_final: f64,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme, k: usize, n_slabs: usize, t_final: f64) -> Result<Self> {
        let c = Self {
            scheme,
            k,
            n_slabs,
            t_final,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.scheme == Scheme::CG && self.k == 0 {
            return Err(Error::invalid("cG needs k >= 1"));
        }
        if self.k > 10 {
            return Err(Error::invalid(format!("temporal degree {} is not supported", self.k)));
        }
        if self.n_slabs == 0 || !(self.t_final > 0.0) {
            return Err(Error::invalid("need at least one slab and T > 0"));
        }
        Ok(())
    }

    pub fn tau(&self) -> f64 {
        self.t_final / self.n_slabs as f64
    }

    pub fn slab_interval(&self, n: usize) -> (f64, f64) {
        let tau = self.tau();
        let t0 = n as f64 * tau;
        let t1 = if n + 1 == self.n_slabs {
            self.t_final
        } else {
            (n + 1) as f64 * tau
        };
        (t0, t1)
    }
}

/// Field values at one time instant.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
}

impl SlabState {
    pub fn zeros(nu: usize, np: usize) -> Self {
        Self {
            u: vec![0.0; nu],
            v: vec![0.0; nu],
            p: vec![0.0; np],
        }
    }

    pub fn field(&self, f: Field) -> &[f64] {
        match f {
            Field::U => &self.u,
            Field::V => &self.v,
            Field::P => &self.p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    U,
    V,
    P,
}

/// Temporal Lagrange basis on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalBasis {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl TemporalBasis {
    pub fn for_scheme(scheme: Scheme, k: usize) -> Result<Self> {
        let rule = match scheme {
            Scheme::DG => gauss_radau_right(k + 1)?,
            Scheme::CG => gauss_lobatto(k + 1)?,
        };
        Ok(Self {
            nodes: rule.points,
            weights: rule.weights,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, j: usize, x: f64) -> f64 {
        lagrange(&self.nodes, j, x)
    }

    pub fn derivative(&self, j: usize, x: f64) -> f64 {
        lagrange_derivative(&self.nodes, j, x)
    }
}

/// Lagrange polynomial `j` on `nodes`, evaluated at `x`.
pub fn lagrange(nodes: &[f64], j: usize, x: f64) -> f64 {
    nodes
        .iter()
        .enumerate()
        .filter(|&(m, _)| m != j)
        .map(|(_, &xm)| (x - xm) / (nodes[j] - xm))
        .product()
}

pub fn lagrange_derivative(nodes: &[f64], j: usize, x: f64) -> f64 {
    let mut sum = 0.0;
    for (l, &xl) in nodes.iter().enumerate() {
        if l == j {
            continue;
        }
        let mut term = 1.0 / (nodes[j] - xl);
        for (m, &xm) in nodes.iter().enumerate() {
            if m != j && m != l {
                term *= (x - xm) / (nodes[j] - xm);
            }
        }
        sum += term;
    }
    sum
}

/// Reference-interval temporal matrices of a slab system.
///
/// For dG, all `k + 1` nodes are unknown and `known` holds `l_i(-1)`, the
/// weight of the incoming state in the jump term. For cG, the first node is
/// the incoming state and is eliminated: `deriv`/`mass` hold the columns of
/// the unknown nodes, `known_deriv`/`known_mass` the eliminated column, and
/// `load` maps load samples at all `k + 1` nodes to the `k` test functions.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalMatrices {
    pub scheme: Scheme,
    pub basis: TemporalBasis,
    /// `deriv[i][j]`, scaled for the slab (includes the jump term for dG).
    pub deriv: Vec<Vec<f64>>,
    /// `mass[i][j]` including the factor `tau / 2`.
    pub mass: Vec<Vec<f64>>,
    pub known_deriv: Vec<f64>,
    pub known_mass: Vec<f64>,
    /// `load[i][mu]` including the factor `tau / 2`.
    pub load: Vec<Vec<f64>>,
}

impl TemporalMatrices {
    pub fn new(scheme: Scheme, k: usize, tau: f64) -> Result<Self> {
        let basis = TemporalBasis::for_scheme(scheme, k)?;
        let nt = basis.len();
        let (t, w) = (&basis.nodes, &basis.weights);
        let h = 0.5 * tau;
        match scheme {
            Scheme::DG => {
                let jump: Vec<f64> = (0..nt).map(|i| basis.value(i, -1.0)).collect();
                let deriv = (0..nt)
                    .map(|i| {
                        (0..nt)
                            .map(|j| w[i] * basis.derivative(j, t[i]) + jump[i] * jump[j])
                            .collect()
                    })
                    .collect();
                let mass: Vec<Vec<f64>> = (0..nt)
                    .map(|i| (0..nt).map(|j| if i == j { h * w[i] } else { 0.0 }).collect())
                    .collect();
                Ok(Self {
                    scheme,
                    deriv,
                    load: mass.clone(),
                    mass,
                    known_deriv: jump,
                    known_mass: vec![0.0; nt],
                    basis,
                })
            }
            Scheme::CG => {
                // test functions: Lagrange at the nodes 1..=k
                let test_nodes = &t[1..];
                let psi = |i: usize, x: f64| lagrange(test_nodes, i, x);
                let full_deriv: Vec<Vec<f64>> = (0..k)
                    .map(|i| {
                        (0..nt)
                            .map(|j| (0..nt).map(|m| w[m] * basis.derivative(j, t[m]) * psi(i, t[m])).sum())
                            .collect()
                    })
                    .collect();
                let full_mass: Vec<Vec<f64>> = (0..k)
                    .map(|i| (0..nt).map(|j| h * w[j] * psi(i, t[j])).collect())
                    .collect();
                Ok(Self {
                    scheme,
                    deriv: full_deriv.iter().map(|r| r[1..].to_vec()).collect(),
                    mass: full_mass.iter().map(|r| r[1..].to_vec()).collect(),
                    known_deriv: full_deriv.iter().map(|r| r[0]).collect(),
                    known_mass: full_mass.iter().map(|r| r[0]).collect(),
                    load: full_mass,
                    basis,
                })
            }
        }
    }

    /// Number of unknown time nodes per field in the slab system.
    pub fn n_unknown(&self) -> usize {
        self.deriv.len()
    }

    /// Reference times of the load samples.
    pub fn load_nodes(&self) -> &[f64] {
        &self.basis.nodes
    }
}

/// Shared handles to the matrices used by the slab systems.
#[derive(Debug, Clone)]
pub struct SlabMatrices {
    pub mass_vec: Arc<SparseMatrix>,
    pub mass_u: Arc<SparseMatrix>,
    pub mass_p: Arc<SparseMatrix>,
    pub a: Arc<SparseMatrix>,
    pub c: Arc<SparseMatrix>,
    pub ct: Arc<SparseMatrix>,
    pub b: Arc<SparseMatrix>,
}

impl SlabMatrices {
    pub fn new(m: &SystemMatrices) -> Self {
        Self {
            mass_vec: Arc::new(m.mass_vec.clone()),
            mass_u: Arc::new(m.mass_u.clone()),
            mass_p: Arc::new(m.mass_p.clone()),
            a: Arc::new(m.a.clone()),
            c: Arc::new(m.c.clone()),
            ct: Arc::new(m.c.transpose()),
            b: Arc::new(m.b.clone()),
        }
    }

    pub fn n_vector(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_pressure(&self) -> usize {
        self.b.nrows()
    }
}

/// Load vectors `(F, G)` sampled at the load nodes of a slab.
pub type SlabLoads = Vec<(Vec<f64>, Vec<f64>)>;

/// Slab system matrix (independent of the incoming state and the loads).
pub fn slab_matrix(tm: &TemporalMatrices, mats: &SlabMatrices) -> Result<BlockSystem> {
    let nt = tm.n_unknown();
    let (nu, np) = (mats.n_vector(), mats.n_pressure());
    let sizes: Vec<usize> = [nu, nu, np].iter().flat_map(|&n| std::iter::repeat_n(n, nt)).collect();
    let mut s = BlockSystem::new(sizes.clone(), sizes);
    let (ub, vb, pb) = (0, nt, 2 * nt);
    for i in 0..nt {
        for j in 0..nt {
            let (d, m) = (tm.deriv[i][j], tm.mass[i][j]);
            s.add(ub + i, ub + j, d, &mats.mass_vec)?;
            s.add(ub + i, vb + j, -m, &mats.mass_vec)?;
            s.add(vb + i, vb + j, d, &mats.mass_u)?;
            s.add(vb + i, ub + j, m, &mats.a)?;
            s.add(vb + i, pb + j, m, &mats.c)?;
            s.add(pb + i, pb + j, d, &mats.mass_p)?;
            s.add(pb + i, vb + j, -m, &mats.ct)?;
            s.add(pb + i, pb + j, m, &mats.b)?;
        }
    }
    Ok(s)
}

/// Right-hand side of a slab system for the incoming state and sampled loads.
pub fn slab_rhs(tm: &TemporalMatrices, mats: &SlabMatrices, state: &SlabState, loads: &SlabLoads) -> Result<Vec<f64>> {
    let nt = tm.n_unknown();
    let (nu, np) = (mats.n_vector(), mats.n_pressure());
    if state.u.len() != nu || state.v.len() != nu || state.p.len() != np {
        return Err(Error::invalid("incoming state does not match the spaces"));
    }
    if loads.len() != tm.load_nodes().len() {
        return Err(Error::invalid("loads must be sampled at every load node"));
    }
    let n = 2 * nt * nu + nt * np;
    let mut rhs = vec![0.0; n];
    let uo = |i: usize| i * nu;
    let vo = |i: usize| (nt + i) * nu;
    let po = |i: usize| 2 * nt * nu + i * np;

    let m_u0 = mats.mass_vec.matvec(&state.u)?;
    let m_v0 = mats.mass_vec.matvec(&state.v)?;
    let rm_v0 = mats.mass_u.matvec(&state.v)?;
    let cm_p0 = mats.mass_p.matvec(&state.p)?;
    // spatial operators applied to the incoming state (cG only)
    let (op_v, op_p) = if tm.scheme == Scheme::CG {
        let mut ov = mats.a.matvec(&state.u)?;
        let cp = mats.c.matvec(&state.p)?;
        ov.iter_mut().zip(&cp).for_each(|(a, b)| *a += b);
        let mut op = mats.b.matvec(&state.p)?;
        let ctv = mats.ct.matvec(&state.v)?;
        op.iter_mut().zip(&ctv).for_each(|(a, b)| *a -= b);
        (ov, op)
    } else {
        (Vec::new(), Vec::new())
    };

    for i in 0..nt {
        let kd = tm.known_deriv[i];
        let km = tm.known_mass[i];
        let (ru, rest) = rhs.split_at_mut(vo(0));
        let ru = &mut ru[uo(i)..uo(i) + nu];
        let (rv, rp) = rest.split_at_mut(nt * nu);
        let rv = &mut rv[i * nu..(i + 1) * nu];
        let rp = &mut rp[po(i) - po(0)..po(i) - po(0) + np];
        for (mu, (f, g)) in loads.iter().enumerate() {
            let w = tm.load[i][mu];
            if w != 0.0 {
                rv.iter_mut().zip(f).for_each(|(r, x)| *r += w * x);
                rp.iter_mut().zip(g).for_each(|(r, x)| *r += w * x);
            }
        }
        match tm.scheme {
            Scheme::DG => {
                ru.iter_mut().zip(&m_u0).for_each(|(r, x)| *r += kd * x);
                rv.iter_mut().zip(&rm_v0).for_each(|(r, x)| *r += kd * x);
                rp.iter_mut().zip(&cm_p0).for_each(|(r, x)| *r += kd * x);
            }
            Scheme::CG => {
                for q in 0..nu {
                    ru[q] += -kd * m_u0[q] + km * m_v0[q];
                    rv[q] += -kd * rm_v0[q] - km * op_v[q];
                }
                for q in 0..np {
                    rp[q] += -kd * cm_p0[q] - km * op_p[q];
                }
            }
        }
    }
    Ok(rhs)
}

/// dG(k) slab system: matrix and right-hand side.
pub fn build_dg_slab(
    state: &SlabState,
    mats: &SlabMatrices,
    loads: &SlabLoads,
    k: usize,
    tau: f64,
) -> Result<(BlockSystem, Vec<f64>)> {
    let tm = TemporalMatrices::new(Scheme::DG, k, tau)?;
    Ok((slab_matrix(&tm, mats)?, slab_rhs(&tm, mats, state, loads)?))
}

/// Condensed cG(k) slab system for the `k` unknown time nodes.
pub fn build_cg_slab(
    state: &SlabState,
    mats: &SlabMatrices,
    loads: &SlabLoads,
    k: usize,
    tau: f64,
) -> Result<(BlockSystem, Vec<f64>)> {
    if k == 0 {
        return Err(Error::invalid("cG needs k >= 1"));
    }
    let tm = TemporalMatrices::new(Scheme::CG, k, tau)?;
    Ok((slab_matrix(&tm, mats)?, slab_rhs(&tm, mats, state, loads)?))
}

/// Solution on one slab: nodal vectors at the `k + 1` temporal nodes. For cG
/// the first node is the incoming state.
#[derive(Debug, Clone, PartialEq)]
pub struct SlabSolution {
    pub scheme: Scheme,
    pub t_start: f64,
    pub t_end: f64,
    pub nodes: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub p: Vec<Vec<f64>>,
}

impl SlabSolution {
    fn field_nodes(&self, f: Field) -> &[Vec<f64>] {
        match f {
            Field::U => &self.u,
            Field::V => &self.v,
            Field::P => &self.p,
        }
    }

    /// Evaluates the temporal polynomial of `field` at `t` (any real `t`;
    /// the polynomial is extended beyond the slab).
    pub fn eval(&self, field: Field, t: f64) -> Vec<f64> {
        let xi = 2.0 * (t - self.t_start) / (self.t_end - self.t_start) - 1.0;
        let nodes = self.field_nodes(field);
        let mut out = vec![0.0; nodes[0].len()];
        for (j, vals) in nodes.iter().enumerate() {
            let l = lagrange(&self.nodes, j, xi);
            if l != 0.0 {
                out.iter_mut().zip(vals).for_each(|(o, v)| *o += l * v);
            }
        }
        out
    }

    /// Value at the right end point (exact nodal read-off).
    pub fn end_state(&self) -> SlabState {
        SlabState {
            u: self.u.last().unwrap().clone(),
            v: self.v.last().unwrap().clone(),
            p: self.p.last().unwrap().clone(),
        }
    }

    /// Value at the slab start from inside the slab.
    pub fn start_value(&self) -> SlabState {
        SlabState {
            u: self.eval(Field::U, self.t_start),
            v: self.eval(Field::V, self.t_start),
            p: self.eval(Field::P, self.t_start),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverChoice {
    /// Exact solve through the temporal eigen-decomposition: one sparse LU
    /// per eigenvalue (or conjugate pair) of spatial size.
    Direct,
    /// Sparse LU of the assembled monolithic slab matrix.
    DirectMonolithic,
    /// ILU(0)-preconditioned restarted GMRES on the monolithic matrix.
    Gmres(GmresOptions),
}

impl SolverChoice {
    pub fn name(&self) -> &'static str {
        match self {
            SolverChoice::Direct => "direct",
            SolverChoice::DirectMonolithic => "direct-monolithic",
            SolverChoice::Gmres(_) => "gmres",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlabStats {
    pub slab: usize,
    pub t_end: f64,
    pub iterations: usize,
    pub residual: f64,
    pub seconds: f64,
}

/// Factored or preconditioned slab operator, reused for every slab of a
/// uniform time mesh.
pub struct SlabSolver {
    system: BlockSystem,
    constrained: Vec<usize>,
    kind: SolverKind,
    nnz: usize,
}

enum SolverKind {
    Modal(ModalSolver),
    Direct(DirectSolver),
    Gmres(SparseMatrix, Ilu0, GmresOptions),
}

impl std::fmt::Debug for SlabSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.kind {
            SolverKind::Modal(_) => "direct",
            SolverKind::Direct(..) => "direct-monolithic",
            SolverKind::Gmres(..) => "gmres",
        };
        f.debug_struct("SlabSolver")
            .field("n", &self.system.nrows())
            .field("nnz", &self.nnz)
            .field("kind", &kind)
            .finish()
    }
}

fn constrained_matrix(system: &BlockSystem, constrained: &[usize]) -> SparseMatrix {
    let matrix = system.to_csr();
    if constrained.is_empty() {
        return matrix;
    }
    let set: ConstraintSet = constrained.iter().map(|&i| (i, 0.0)).collect();
    let mut dummy = vec![0.0; matrix.nrows()];
    matrix.apply_constraints(&mut dummy, &set)
}

impl SlabSolver {
    /// Prepares the solver for the slab system of `tm`. `constraints` are the
    /// homogeneous spatial constraints of the vector space; they hold for u
    /// and v at every time node.
    pub fn new(
        tm: &TemporalMatrices,
        mats: &SlabMatrices,
        constraints: &ConstraintSet,
        choice: SolverChoice,
    ) -> Result<Self> {
        if constraints.values().any(|&v| v != 0.0) {
            return Err(Error::invalid("only homogeneous constraints are supported"));
        }
        let system = slab_matrix(tm, mats)?;
        let constrained = constrained_slab_indices(constraints, tm.n_unknown(), mats.n_vector());
        let (kind, nnz) = match choice {
            SolverChoice::Direct => {
                let m = ModalSolver::new(tm, mats, constraints)?;
                let nnz = m.factor_nnz();
                (SolverKind::Modal(m), nnz)
            }
            SolverChoice::DirectMonolithic => {
                let a = constrained_matrix(&system, &constrained);
                let lu = DirectSolver::factor(&a)?;
                let nnz = a.nnz();
                (SolverKind::Direct(lu), nnz)
            }
            SolverChoice::Gmres(o) => {
                let a = constrained_matrix(&system, &constrained);
                let ilu = Ilu0::new(&a)?;
                let nnz = a.nnz();
                (SolverKind::Gmres(a, ilu, o), nnz)
            }
        };
        Ok(Self {
            system,
            constrained,
            kind,
            nnz,
        })
    }

    /// Number of unknowns of the slab system.
    pub fn n_unknowns(&self) -> usize {
        self.system.nrows()
    }

    /// Stored nonzeros of the matrices the solver works with.
    pub fn nnz(&self) -> usize {
        self.nnz
    }

    /// Relative residual of `x` for the constrained slab system.
    fn residual(&self, x: &[f64], rhs: &[f64]) -> std::result::Result<f64, SolverError> {
        let mut r = self.system.matvec(x)?;
        r.iter_mut().zip(rhs).for_each(|(a, b)| *a -= b);
        for &i in &self.constrained {
            r[i] = x[i] - rhs[i];
        }
        let bn = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
        let rn = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        Ok(if bn > 0.0 { rn / bn } else { rn })
    }

    /// Solves with a right-hand side whose constrained entries are zero.
    pub fn solve(&self, rhs: &[f64], guess: Option<&[f64]>) -> std::result::Result<(Vec<f64>, usize, f64), SolverError> {
        match &self.kind {
            SolverKind::Modal(m) => {
                let x = m.solve(rhs)?;
                let res = self.residual(&x, rhs)?;
                Ok((x, 0, res))
            }
            SolverKind::Direct(lu) => {
                let x = lu.solve(rhs)?;
                let res = self.residual(&x, rhs)?;
                Ok((x, 0, res))
            }
            SolverKind::Gmres(a, ilu, opts) => {
                let (x, st) = solve_gmres(a, rhs, guess, ilu, opts)?;
                Ok((x, st.iterations, st.residual))
            }
        }
    }
}

/// Everything needed to march a problem in time.
pub struct TimeProblem<'a> {
    pub vspace: &'a FunctionSpace,
    pub pspace: &'a FunctionSpace,
    pub params: &'a MaterialParams,
    pub matrices: &'a SystemMatrices,
    pub data: &'a ProblemData,
}

/// Result of [`advance`]: the slab solutions (if recorded) and solver stats.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SchemeConfig,
    pub initial: SlabState,
    pub slabs: Vec<SlabSolution>,
    pub stats: Vec<SlabStats>,
    pub n_unknowns: usize,
    pub nnz: usize,
}

/// Slab-level indices of the constrained vector DOFs (u and v, every time node).
fn constrained_slab_indices(constraints: &ConstraintSet, nt: usize, nu: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(2 * nt * constraints.len());
    for block in 0..2 * nt {
        out.extend(constraints.keys().map(|&d| block * nu + d));
    }
    out
}

/// Marches from the initial state over all slabs, calling `observer` with
/// each slab solution. Returns the per-slab statistics and system size.
pub fn advance_with(
    config: &SchemeConfig,
    initial: &SlabState,
    problem: &TimeProblem<'_>,
    solver: SolverChoice,
    mut observer: impl FnMut(usize, &SlabSolution) -> Result<()>,
) -> Result<(Vec<SlabStats>, usize, usize)> {
    config.validate()?;
    let mats = SlabMatrices::new(problem.matrices);
    let tau = config.tau();
    let tm = TemporalMatrices::new(config.scheme, config.k, tau)?;
    let nt = tm.n_unknown();
    let nu = mats.n_vector();
    let np = mats.n_pressure();
    let constrained = constrained_slab_indices(problem.vspace.constraints(), nt, nu);
    let slab_solver =
        SlabSolver::new(&tm, &mats, problem.vspace.constraints(), solver).map_err(|e| match e {
            Error::Solver(source) => Error::SlabFailed {
                slab: 0,
                t_end: config.slab_interval(0).1,
                source,
            },
            other => other,
        })?;
    let n_unknowns = slab_solver.n_unknowns();
    let nnz = slab_solver.nnz();

    let mut state = initial.clone();
    let mut stats = Vec::with_capacity(config.n_slabs);
    let mut guess: Option<Vec<f64>> = None;
    let mut cached_load: Option<(f64, (Vec<f64>, Vec<f64>))> = None;
    for n in 0..config.n_slabs {
        let start = Instant::now();
        let (t0, t1) = config.slab_interval(n);
        let times: Vec<f64> = tm
            .load_nodes()
            .iter()
            .map(|&x| t0 + 0.5 * (x + 1.0) * (t1 - t0))
            .collect();
        let mut loads: SlabLoads = Vec::with_capacity(times.len());
        for &t in &times {
            match &cached_load {
                Some((tc, l)) if *tc == t => loads.push(l.clone()),
                _ => loads.push(assemble_loads(problem.vspace, problem.pspace, problem.params, problem.data, t)?),
            }
        }
        cached_load = Some((*times.last().unwrap(), loads.last().unwrap().clone()));
        let mut rhs = slab_rhs(&tm, &mats, &state, &loads)?;
        for &i in &constrained {
            rhs[i] = 0.0;
        }
        let (x, iterations, residual) = slab_solver
            .solve(&rhs, guess.as_deref())
            .map_err(|e| Error::SlabFailed {
                slab: n,
                t_end: t1,
                source: e,
            })?;
        let mut sol = SlabSolution {
            scheme: config.scheme,
            t_start: t0,
            t_end: t1,
            nodes: tm.basis.nodes.clone(),
            u: Vec::with_capacity(nt + 1),
            v: Vec::with_capacity(nt + 1),
            p: Vec::with_capacity(nt + 1),
        };
        if config.scheme == Scheme::CG {
            sol.u.push(state.u.clone());
            sol.v.push(state.v.clone());
            sol.p.push(state.p.clone());
        }
        for i in 0..nt {
            sol.u.push(x[i * nu..(i + 1) * nu].to_vec());
            sol.v.push(x[(nt + i) * nu..(nt + i + 1) * nu].to_vec());
            let po = 2 * nt * nu + i * np;
            sol.p.push(x[po..po + np].to_vec());
        }
        state = sol.end_state();
        guess = Some(x);
        stats.push(SlabStats {
            slab: n,
            t_end: t1,
            iterations,
            residual,
            seconds: start.elapsed().as_secs_f64(),
        });
        observer(n, &sol)?;
    }
    Ok((stats, n_unknowns, nnz))
}

/// Marches over all slabs and records every slab solution.
pub fn advance(
    config: &SchemeConfig,
    initial: &SlabState,
    problem: &TimeProblem<'_>,
    solver: SolverChoice,
) -> Result<Trajectory> {
    let mut slabs = Vec::with_capacity(config.n_slabs);
    let (stats, n_unknowns, nnz) = advance_with(config, initial, problem, solver, |_, s| {
        slabs.push(s.clone());
        Ok(())
    })?;
    Ok(Trajectory {
        config: *config,
        initial: initial.clone(),
        slabs,
        stats,
        n_unknowns,
        nnz,
    })
}

/// Which one-sided value to take at a slab boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Limit from the slab ending at `t`.
    Left,
    /// Limit from the slab starting at `t`.
    Right,
}

impl Trajectory {
    pub fn end_state(&self) -> SlabState {
        self.slabs.last().map(|s| s.end_state()).unwrap_or_else(|| self.initial.clone())
    }

    /// Index of the slab with `t` in `(t_{n-1}, t_n]`, or in `[t_{n-1}, t_n)`
    /// for [`Side::Right`]. `None` means the initial data (t = 0, left side).
    fn locate(&self, t: f64, side: Side) -> Result<Option<usize>> {
        let cfg = &self.config;
        let eps = 1e-12 * cfg.t_final;
        if !(t >= -eps && t <= cfg.t_final + eps) {
            return Err(Error::invalid(format!("time {t} outside [0, {}]", cfg.t_final)));
        }
        if self.slabs.len() != cfg.n_slabs {
            return Err(Error::invalid("trajectory does not hold the slab solutions"));
        }
        let tau = cfg.tau();
        let s = t / tau;
        let nearest = s.round();
        let on_node = (s - nearest).abs() * tau <= eps;
        let idx = match (on_node, side) {
            (true, Side::Left) if nearest <= 0.0 => return Ok(None),
            (true, Side::Left) => nearest as usize - 1,
            (true, Side::Right) => nearest as usize,
            (false, _) => s.floor() as usize,
        };
        Ok(Some(idx.min(cfg.n_slabs - 1)))
    }

    /// Coefficients of `field` at time `t`; slab end points take the value
    /// from the slab ending there, `t = 0` gives the initial data.
    pub fn evaluate_at_time(&self, t: f64, field: Field) -> Result<Vec<f64>> {
        self.evaluate_limit(t, field, Side::Left)
    }

    pub fn evaluate_limit(&self, t: f64, field: Field, side: Side) -> Result<Vec<f64>> {
        match self.locate(t, side)? {
            None => Ok(self.initial.field(field).to_vec()),
            Some(n) => {
                let slab = &self.slabs[n];
                let tn = slab.t_end;
                if side == Side::Left && (t - tn).abs() <= 1e-12 * self.config.t_final {
                    let nodes = slab.field_nodes(field);
                    return Ok(nodes.last().unwrap().clone());
                }
                Ok(slab.eval(field, t))
            }
        }
    }
}

/// Discrete energy `(rho |v|^2 + <A u, u> + c0 |p|^2) / 2`.
pub fn energy(m: &SystemMatrices, s: &SlabState) -> Result<f64> {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let kv = dot(&m.mass_u.matvec(&s.v)?, &s.v);
    let au = dot(&m.a.matvec(&s.u)?, &s.u);
    let cp = dot(&m.mass_p.matvec(&s.p)?, &s.p);
    Ok(0.5 * (kv + au + cp))
}

/// Text dump of an end-of-slab state.
pub fn write_checkpoint<W: Write>(
    mut w: W,
    config: &SchemeConfig,
    r: usize,
    slab: usize,
    t: f64,
    state: &SlabState,
) -> std::io::Result<()> {
    writeln!(
        w,
        "# scheme={} k={} r={} slab={} t={:.17e}",
        config.scheme.as_str(),
        config.k,
        r,
        slab,
        t
    )?;
    for (name, v) in [("u", &state.u), ("v", &state.v), ("p", &state.p)] {
        writeln!(w, "{name} {}", v.len())?;
        for x in v.iter() {
            writeln!(w, "{x:.17e}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lagrange_basis_properties() {
        let nodes = [-1.0, -0.2, 0.5, 1.0];
        for j in 0..4 {
            for (m, &x) in nodes.iter().enumerate() {
                let expect = if m == j { 1.0 } else { 0.0 };
                assert!((lagrange(&nodes, j, x) - expect).abs() < 1e-14);
            }
            let h = 1e-6;
            let x = 0.3;
            let fd = (lagrange(&nodes, j, x + h) - lagrange(&nodes, j, x - h)) / (2.0 * h);
            assert!((fd - lagrange_derivative(&nodes, j, x)).abs() < 1e-8);
        }
    }

    #[test]
    fn dg0_is_backward_euler_in_time() {
        let tm = TemporalMatrices::new(Scheme::DG, 0, 0.1).unwrap();
        assert_eq!(tm.deriv, vec![vec![1.0]]);
        assert!((tm.mass[0][0] - 0.1).abs() < 1e-15);
        assert_eq!(tm.known_deriv, vec![1.0]);
    }

    #[test]
    fn cg1_is_trapezoid_in_time() {
        let tau = 0.2;
        let tm = TemporalMatrices::new(Scheme::CG, 1, tau).unwrap();
        assert!((tm.deriv[0][0] - 1.0).abs() < 1e-14);
        assert!((tm.known_deriv[0] + 1.0).abs() < 1e-14);
        assert!((tm.mass[0][0] - 0.5 * tau).abs() < 1e-15);
        assert!((tm.known_mass[0] - 0.5 * tau).abs() < 1e-15);
    }

    #[test]
    fn condensed_cg_matches_dg_dimension() {
        for k in 0..4 {
            let dg = TemporalMatrices::new(Scheme::DG, k, 1.0).unwrap();
            let cg = TemporalMatrices::new(Scheme::CG, k + 1, 1.0).unwrap();
            assert_eq!(dg.n_unknown(), cg.n_unknown());
        }
        assert!(TemporalMatrices::new(Scheme::CG, 0, 1.0).is_err() || SchemeConfig::new(Scheme::CG, 0, 1, 1.0).is_err());
    }

    #[test]
    fn temporal_operators_differentiate_polynomials_exactly() {
        // For w(t) = t^k on the slab, sum_j deriv[i][j] w_j plus the known
        // part equals the tested integral of w'.
        let tau = 0.3;
        let (t0, t1) = (1.0, 1.0 + tau);
        for k in 1..5 {
            for scheme in [Scheme::DG, Scheme::CG] {
                let tm = TemporalMatrices::new(scheme, k, tau).unwrap();
                let nodes = &tm.basis.nodes;
                let w = |x: f64| (t0 + 0.5 * (x + 1.0) * tau).powi(k as i32);
                let vals: Vec<f64> = nodes.iter().map(|&x| w(x)).collect();
                let unknown = match scheme {
                    Scheme::DG => &vals[..],
                    Scheme::CG => &vals[1..],
                };
                let known = match scheme {
                    Scheme::DG => w(-1.0), // continuous: jump term against itself
                    Scheme::CG => vals[0],
                };
                for i in 0..tm.n_unknown() {
                    let mut lhs: f64 = (0..tm.n_unknown()).map(|j| tm.deriv[i][j] * unknown[j]).sum();
                    lhs += match scheme {
                        Scheme::DG => -tm.known_deriv[i] * known,
                        Scheme::CG => tm.known_deriv[i] * known,
                    };
                    // tested integral of w' against the i-th test function
                    let test = |x: f64| match scheme {
                        Scheme::DG => lagrange(nodes, i, x),
                        Scheme::CG => lagrange(&nodes[1..], i, x),
                    };
                    let g = crate::quadrature::gauss_legendre(k + 2).unwrap();
                    let dw = |x: f64| (k as f64) * (t0 + 0.5 * (x + 1.0) * tau).powi(k as i32 - 1) * 0.5 * tau;
                    let exact = g.integrate(|x| dw(x) * test(x));
                    assert!((lhs - exact).abs() < 1e-12, "{scheme:?} k={k} i={i}: {lhs} vs {exact}");
                }
                let _ = t1;
            }
        }
    }
}
