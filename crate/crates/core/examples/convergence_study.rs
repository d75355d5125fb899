//! Space-time convergence study against the smooth manufactured solution.
//!
//! Usage: cargo run --release --example convergence_study -- [dg|cg] [k] [r] [levels...] [--gmres]

use biot_st::assembly::AssemblyOptions;
use biot_st::problems::{eoc, ManufacturedCase};
use biot_st::study::{convergence_study, Discretization};
use biot_st::linalg::GmresOptions;
use biot_st::timeslab::{Scheme, SolverChoice};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args: Vec<String> = std::env::args().skip(1).collect();
    let gmres = args.iter().any(|a| a == "--gmres");
    args.retain(|a| a != "--gmres");
    let scheme = args.first().and_then(|s| Scheme::parse(s)).unwrap_or(Scheme::DG);
    let k = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(2);
    let r = args.get(2).map(|s| s.parse()).transpose()?.unwrap_or(4);
    let levels: Vec<usize> = if args.len() > 3 {
        args[3..].iter().map(|s| s.parse()).collect::<Result<_, _>>()?
    } else {
        vec![0, 1]
    };
    let disc = Discretization {
        scheme,
        k,
        r,
        solver: if gmres { SolverChoice::Gmres(GmresOptions::default()) } else { SolverChoice::Direct },
        assembly: AssemblyOptions::default(),
    };
    println!("{}({k}), Q{r}/P{}", scheme.as_str(), r - 1);
    println!("{:>5} {:>10} {:>10} {:>14} {:>14} {:>14} {:>9} {:>8}", "level", "h", "tau", "grad u", "v", "p", "unknowns", "seconds");
    let rows = convergence_study(&ManufacturedCase::default(), &disc, &levels, |row| {
        println!(
            "{:>5} {:>10.4e} {:>10.4e} {:>14.10e} {:>14.10e} {:>14.10e} {:>9} {:>8.1}",
            row.level, row.h, row.tau, row.errors[0], row.errors[1], row.errors[2], row.n_unknowns, row.seconds
        );
    })?;
    if rows.len() > 1 {
        for c in 0..3 {
            let e: Vec<f64> = rows.iter().map(|r| r.errors[c]).collect();
            println!("EOC column {c}: {:?}", eoc(&e)?.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>());
        }
    }
    Ok(())
}
