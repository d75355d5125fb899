//! The slab solvers agree on the same problems: the modal direct solver, the
//! monolithic sparse LU and ILU-preconditioned GMRES.

use biot_st::assembly::{assemble_system, AssemblyOptions};
use biot_st::linalg::GmresOptions;
use biot_st::mesh::DisplacementTag;
use biot_st::problems::{BenchmarkCase, ManufacturedCase};
use biot_st::spaces::{build_p_disc_space, build_q_space, mark_directional_constraints};
use biot_st::timeslab::{advance, Scheme, SchemeConfig, SlabSolution, SlabState, SolverChoice, TimeProblem};

fn all_values(slabs: &[SlabSolution]) -> Vec<f64> {
    slabs
        .iter()
        .flat_map(|s| s.u.iter().chain(&s.v).chain(&s.p).flatten().copied())
        .collect()
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn run_all(problem: &TimeProblem<'_>, config: &SchemeConfig, initial: &SlabState, gmres: GmresOptions) -> [Vec<f64>; 3] {
    [SolverChoice::Direct, SolverChoice::DirectMonolithic, SolverChoice::Gmres(gmres)].map(|solver| {
        let traj = advance(config, initial, problem, solver).unwrap();
        all_values(&traj.slabs)
    })
}

#[test]
fn solvers_agree_on_the_two_slab_benchmark_smoke_run() {
    let case = BenchmarkCase {
        t_final: 0.5,
        tau0: 0.25,
        ..BenchmarkCase::default()
    };
    let mesh = case.mesh(0).unwrap();
    for (scheme, k) in [(Scheme::DG, 2), (Scheme::CG, 3)] {
        let r = 3;
        let mut vspace = build_q_space(mesh.clone(), r, 2).unwrap();
        let rollers = mark_directional_constraints(&vspace, DisplacementTag::Directional).unwrap();
        assert!(!rollers.is_empty());
        vspace.set_constraints(rollers);
        let pspace = build_p_disc_space(mesh.clone(), r - 1).unwrap();
        let params = case.params(r).unwrap();
        let mats = assemble_system(&vspace, &pspace, &params, AssemblyOptions::default()).unwrap();
        let data = case.data();
        let problem = TimeProblem {
            vspace: &vspace,
            pspace: &pspace,
            params: &params,
            matrices: &mats,
            data: &data,
        };
        let config = SchemeConfig::new(scheme, k, case.n_slabs(0), case.t_final).unwrap();
        assert_eq!(config.n_slabs, 2);
        let initial = SlabState::zeros(vspace.total_dofs(), pspace.total_dofs());
        let gmres = GmresOptions {
            rel_tol: 1e-12,
            max_iter: 20000,
            restart: 200,
        };
        let [modal, mono, iter] = run_all(&problem, &config, &initial, gmres);
        let scale = modal.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        assert!(scale > 0.0);
        let tol = f64::max(1e-8, 10.0 * gmres.rel_tol) * scale;
        let (dm, dg) = (max_diff(&modal, &mono), max_diff(&modal, &iter));
        assert!(dm <= tol, "{}: modal vs monolithic {dm:e} (scale {scale:e})", scheme.as_str());
        assert!(dg <= tol, "{}: modal vs gmres {dg:e} (scale {scale:e})", scheme.as_str());
    }
}

#[test]
fn modal_solver_matches_monolithic_lu_on_the_manufactured_problem() {
    let case = ManufacturedCase::default();
    let mesh = case.mesh(0).unwrap();
    let r = 4;
    let vspace = build_q_space(mesh.clone(), r, 2).unwrap();
    let pspace = build_p_disc_space(mesh, r - 1).unwrap();
    let params = case.params(r).unwrap();
    let mats = assemble_system(&vspace, &pspace, &params, AssemblyOptions::default()).unwrap();
    let data = case.data();
    let problem = TimeProblem {
        vspace: &vspace,
        pspace: &pspace,
        params: &params,
        matrices: &mats,
        data: &data,
    };
    let initial = SlabState {
        u: vspace.interpolate(|x| case.exact(x, 0.0).u.to_vec()).coeffs,
        v: vspace.interpolate(|x| case.exact(x, 0.0).v.to_vec()).coeffs,
        p: pspace.interpolate(|x| vec![case.exact(x, 0.0).p]).coeffs,
    };
    for (scheme, k) in [(Scheme::DG, 0), (Scheme::DG, 2), (Scheme::CG, 1), (Scheme::CG, 3)] {
        let config = SchemeConfig::new(scheme, k, 5, 0.5).unwrap();
        let a = advance(&config, &initial, &problem, SolverChoice::Direct).unwrap();
        let b = advance(&config, &initial, &problem, SolverChoice::DirectMonolithic).unwrap();
        let (a, b) = (all_values(&a.slabs), all_values(&b.slabs));
        let scale = b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let d = max_diff(&a, &b);
        assert!(d <= 1e-10 * scale, "{}({k}): {d:e} relative to {scale:e}", scheme.as_str());
    }
}
