//! Drivers for the two studies: manufactured-solution convergence runs and
//! the L-shaped benchmark.

use std::time::Instant;

use crate::assembly::{assemble_system, AssemblyOptions};
use crate::error::{Error, Result};
use crate::mesh::DisplacementTag;
use crate::problems::{
    dominant_period, goal_characteristics, BenchmarkCase, ErrorAccumulator, GoalCharacteristics, GoalFunctionals,
    GoalSeries, ManufacturedCase,
};
use crate::spaces::{build_p_disc_space, build_q_space, mark_directional_constraints};
use crate::timeslab::{advance_with, SchemeConfig, Scheme, SlabState, SlabStats, SolverChoice, TimeProblem};

/// Discretization choice shared by both studies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub scheme: Scheme,
    pub k: usize,
    pub r: usize,
    pub solver: SolverChoice,
    pub assembly: AssemblyOptions,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub tau: f64,
    /// `[grad u, v, p]` errors in `L2(L2)`.
    pub errors: [f64; 3],
    pub n_unknowns: usize,
    pub nnz: usize,
    pub seconds: f64,
    pub stats: Vec<SlabStats>,
}

/// One refinement level of the manufactured-solution study.
pub fn manufactured_level(case: &ManufacturedCase, disc: &Discretization, level: usize) -> Result<ConvergenceRow> {
    let start = Instant::now();
    let mesh = case.mesh(level)?;
    let vspace = build_q_space(mesh.clone(), disc.r, 2)?;
    let pspace = build_p_disc_space(mesh.clone(), disc.r - 1)?;
    let params = case.params(disc.r)?;
    let matrices = assemble_system(&vspace, &pspace, &params, disc.assembly)?;
    let data = case.data();
    let config = SchemeConfig::new(disc.scheme, disc.k, case.n_slabs(level), case.t_final)?;
    let initial = SlabState {
        u: vspace.interpolate(|x| case.exact(x, 0.0).u.to_vec()).coeffs,
        v: vspace.interpolate(|x| case.exact(x, 0.0).v.to_vec()).coeffs,
        p: pspace.interpolate(|x| vec![case.exact(x, 0.0).p]).coeffs,
    };
    let problem = TimeProblem {
        vspace: &vspace,
        pspace: &pspace,
        params: &params,
        matrices: &matrices,
        data: &data,
    };
    let mut acc = ErrorAccumulator::new(&vspace, &pspace, *case, disc.k);
    let (stats, n_unknowns, nnz) = advance_with(&config, &initial, &problem, disc.solver, |_, slab| {
        acc.add_slab(slab);
        Ok(())
    })?;
    Ok(ConvergenceRow {
        level,
        h: mesh.h(),
        tau: config.tau(),
        errors: acc.errors(),
        n_unknowns,
        nnz,
        seconds: start.elapsed().as_secs_f64(),
        stats,
    })
}

/// Runs the levels in order, attaching the level to any failure.
pub fn convergence_study(
    case: &ManufacturedCase,
    disc: &Discretization,
    levels: &[usize],
    mut on_row: impl FnMut(&ConvergenceRow),
) -> Result<Vec<ConvergenceRow>> {
    if levels.is_empty() {
        return Err(Error::invalid("no refinement levels given"));
    }
    let mut rows = Vec::with_capacity(levels.len());
    for &level in levels {
        let row = manufactured_level(case, disc, level).map_err(|e| Error::LevelFailed {
            level,
            source: Box::new(e),
        })?;
        on_row(&row);
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct BenchmarkRun {
    pub level: usize,
    pub h: f64,
    pub tau: f64,
    pub series: GoalSeries,
    /// Extrema over `[T - 1, T]`, if the run reaches that far.
    pub characteristics: Option<GoalCharacteristics>,
    /// Dominant periods of `G_u` and `G_p` over the second half of the run.
    pub periods: Option<(f64, f64)>,
    pub n_unknowns: usize,
    pub nnz: usize,
    pub seconds: f64,
    pub stats: Vec<SlabStats>,
}

/// Samples per slab for the goal series.
pub const GOAL_SAMPLES_PER_SLAB: usize = 8;

/// One benchmark run on mesh level `level` with `case.tau0 / 2^level`.
pub fn benchmark_run(case: &BenchmarkCase, disc: &Discretization, level: usize) -> Result<BenchmarkRun> {
    let start = Instant::now();
    let mesh = case.mesh(level)?;
    let mut vspace = build_q_space(mesh.clone(), disc.r, 2)?;
    let rollers = mark_directional_constraints(&vspace, DisplacementTag::Directional)?;
    vspace.set_constraints(rollers);
    let pspace = build_p_disc_space(mesh.clone(), disc.r - 1)?;
    let params = case.params(disc.r)?;
    let matrices = assemble_system(&vspace, &pspace, &params, disc.assembly)?;
    let data = case.data();
    let config = SchemeConfig::new(disc.scheme, disc.k, case.n_slabs(level), case.t_final)?;
    let initial = SlabState::zeros(vspace.total_dofs(), pspace.total_dofs());
    let goals = GoalFunctionals::new(&vspace, &pspace)?;
    let problem = TimeProblem {
        vspace: &vspace,
        pspace: &pspace,
        params: &params,
        matrices: &matrices,
        data: &data,
    };
    let mut series = GoalSeries::default();
    let (g0u, g0p) = goals.evaluate(&initial.u, &initial.p);
    series.push(0.0, g0u, g0p);
    let (stats, n_unknowns, nnz) = advance_with(&config, &initial, &problem, disc.solver, |_, slab| {
        series.add_slab(slab, &goals, GOAL_SAMPLES_PER_SLAB);
        Ok(())
    })?;
    let tau = config.tau();
    let t_final = case.t_final;
    let spacing = tau / GOAL_SAMPLES_PER_SLAB as f64;
    let characteristics = if t_final >= 1.0 {
        Some(goal_characteristics(&series, (t_final - 1.0, t_final), spacing * 1.01)?)
    } else {
        None
    };
    let periods = match (
        dominant_period(&series.t, &series.gu, 0.5 * t_final),
        dominant_period(&series.t, &series.gp, 0.5 * t_final),
    ) {
        (Ok(a), Ok(b)) => Some((a, b)),
        _ => None,
    };
    Ok(BenchmarkRun {
        level,
        h: mesh.h(),
        tau,
        series,
        characteristics,
        periods,
        n_unknowns,
        nnz,
        seconds: start.elapsed().as_secs_f64(),
        stats,
    })
}
