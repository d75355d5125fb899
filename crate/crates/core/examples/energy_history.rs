//! Free evolution with zero data from a smooth initial state: discrete
//! energy at slab ends for dG(k) and cG(k). The pressure diffusion drains
//! energy in both; dG adds numerical damping on top.
//!
//! Usage: cargo run --example energy_history -- [k] [n_slabs]

use biot_st::assembly::{assemble_system, AssemblyOptions, ProblemData};
use biot_st::problems::ManufacturedCase;
use biot_st::spaces::{build_p_disc_space, build_q_space};
use biot_st::timeslab::{advance, energy, Scheme, SchemeConfig, SlabState, SolverChoice, TimeProblem};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let k: usize = args.first().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let n_slabs: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(20);

    let case = ManufacturedCase::default();
    let mesh = case.mesh(0)?;
    let vspace = build_q_space(mesh.clone(), 2, 2)?;
    let pspace = build_p_disc_space(mesh, 1)?;
    let params = case.params(2)?;
    let matrices = assemble_system(&vspace, &pspace, &params, AssemblyOptions::default())?;
    let data = ProblemData::homogeneous();
    let problem = TimeProblem {
        vspace: &vspace,
        pspace: &pspace,
        params: &params,
        matrices: &matrices,
        data: &data,
    };
    let bump = |x: [f64; 2]| (x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1])) * 16.0;
    let initial = SlabState {
        u: vspace.interpolate(|x| vec![bump(x), 0.0]).coeffs,
        v: vspace.interpolate(|x| vec![0.0, bump(x)]).coeffs,
        p: pspace.interpolate(|x| vec![bump(x)]).coeffs,
    };
    let e0 = energy(&matrices, &initial)?;
    println!("initial energy {e0:.6e}");
    for scheme in [Scheme::DG, Scheme::CG] {
        let k = if scheme == Scheme::CG { k.max(1) } else { k };
        let config = SchemeConfig::new(scheme, k, n_slabs, 1.0)?;
        let traj = advance(&config, &initial, &problem, SolverChoice::Direct)?;
        print!("{}({k}):", scheme.as_str());
        for slab in &traj.slabs {
            print!(" {:.4}", energy(&matrices, &slab.end_state())? / e0);
        }
        println!();
    }
    Ok(())
}
