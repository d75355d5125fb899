//! L-shaped poroelastic benchmark: pulsed traction, rollers, and the goal
//! quantities `G_u`, `G_p` on the notch side.
//!
//! Usage: cargo run --release --example l_shaped_benchmark -- [dg|cg] [k] [r] [level] [t_final] [tau0]

use biot_st::assembly::AssemblyOptions;
use biot_st::problems::BenchmarkCase;
use biot_st::study::{benchmark_run, Discretization};
use biot_st::timeslab::{Scheme, SolverChoice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let scheme = args.first().and_then(|s| Scheme::parse(s)).unwrap_or(Scheme::DG);
    let k = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let r = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(3);
    let level = args.get(3).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let mut case = BenchmarkCase::default();
    if let Some(t) = args.get(4) {
        case.t_final = t.parse()?;
    }
    if let Some(t) = args.get(5) {
        case.tau0 = t.parse()?;
    }
    let disc = Discretization {
        scheme,
        k,
        r,
        solver: SolverChoice::Direct,
        assembly: AssemblyOptions::default(),
    };
    let run = benchmark_run(&case, &disc, level)?;
    println!(
        "{}({k}) Q{r}/P{} level {level}: h = {:.4e}, tau = {:.4e}, {} unknowns per slab, {:.1} s",
        scheme.as_str(),
        r - 1,
        run.h,
        run.tau,
        run.n_unknowns,
        run.seconds
    );
    let stride = (run.series.t.len() / 40).max(1);
    println!("{:>10} {:>14} {:>14}", "t", "G_u", "G_p");
    for i in (0..run.series.t.len()).step_by(stride) {
        println!("{:>10.4} {:>14.6e} {:>14.6e}", run.series.t[i], run.series.gu[i], run.series.gp[i]);
    }
    if let Some(c) = run.characteristics {
        println!("window [T-1, T]: min G_p {:.4e}  max G_p {:.4e}  min G_u {:.4e}  max G_u {:.4e}", c.min_gp, c.max_gp, c.min_gu, c.max_gu);
    }
    if let Some((pu, pp)) = run.periods {
        println!("dominant period: G_u {pu:.4}  G_p {pp:.4}");
    }
    Ok(())
}
