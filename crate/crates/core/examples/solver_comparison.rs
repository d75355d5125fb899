//! The same manufactured run with each slab solver: the modal direct solver,
//! a monolithic sparse LU, and ILU(0)-preconditioned GMRES.
//!
//! Usage: cargo run --example solver_comparison -- [dg|cg] [k] [r] [level]

use std::time::Instant;

use biot_st::assembly::{assemble_system, AssemblyOptions};
use biot_st::linalg::GmresOptions;
use biot_st::problems::ManufacturedCase;
use biot_st::spaces::{build_p_disc_space, build_q_space};
use biot_st::timeslab::{advance, Scheme, SchemeConfig, SlabState, SolverChoice, TimeProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scheme = args.first().and_then(|s| Scheme::parse(s)).unwrap_or(Scheme::DG);
    let k: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let r: usize = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let level: usize = args.get(3).map(|s| s.parse()).transpose()?.unwrap_or(0);

    let case = ManufacturedCase::default();
    let mesh = case.mesh(level)?;
    let vspace = build_q_space(mesh.clone(), r, 2)?;
    let pspace = build_p_disc_space(mesh, r - 1)?;
    let params = case.params(r)?;
    let matrices = assemble_system(&vspace, &pspace, &params, AssemblyOptions::default())?;
    let data = case.data();
    let problem = TimeProblem {
        vspace: &vspace,
        pspace: &pspace,
        params: &params,
        matrices: &matrices,
        data: &data,
    };
    let config = SchemeConfig::new(scheme, k, case.n_slabs(level), case.t_final)?;
    let initial = SlabState {
        u: vspace.interpolate(|x| case.exact(x, 0.0).u.to_vec()).coeffs,
        v: vspace.interpolate(|x| case.exact(x, 0.0).v.to_vec()).coeffs,
        p: pspace.interpolate(|x| vec![case.exact(x, 0.0).p]).coeffs,
    };

    let gmres = GmresOptions {
        rel_tol: 1e-12,
        ..GmresOptions::default()
    };
    let mut reference: Option<SlabState> = None;
    for solver in [SolverChoice::Direct, SolverChoice::DirectMonolithic, SolverChoice::Gmres(gmres)] {
        let start = Instant::now();
        let traj = advance(&config, &initial, &problem, solver)?;
        let end = traj.slabs.last().expect("at least one slab").end_state();
        let iters: usize = traj.stats.iter().map(|s| s.iterations).sum();
        let worst = traj.stats.iter().map(|s| s.residual).fold(0.0, f64::max);
        let diff = reference.as_ref().map_or(0.0, |r| {
            r.u.iter()
                .chain(&r.v)
                .chain(&r.p)
                .zip(end.u.iter().chain(&end.v).chain(&end.p))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        });
        println!(
            "{:<18} {} unknowns/slab, {:>9} stored entries, {:>5} iterations, max residual {worst:.2e}, max diff to direct {diff:.2e}, {:.2} s",
            solver.name(),
            traj.n_unknowns,
            traj.nnz,
            iters,
            start.elapsed().as_secs_f64()
        );
        reference.get_or_insert(end);
    }
    Ok(())
}
