//! Study runner behind the `biot-st` binary: executes a [`RunConfig`] and
//! writes CSV artifacts and a run log into the output directory.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

pub use config::{parse_pairs, CaseKind, RunConfig, SolverName, Study};

use crate::error::{Error, Result};
use crate::study::{benchmark_run, convergence_study, BenchmarkRun, ConvergenceRow};
use crate::timeslab::SlabStats;

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for invalid configuration or output location.
pub const EXIT_CONFIG: i32 = 2;
/// Exit status for a failed linear solve.
pub const EXIT_SOLVER: i32 = 3;

pub fn exit_code(err: &Error) -> i32 {
    if err.is_solver_failure() {
        EXIT_SOLVER
    } else {
        EXIT_CONFIG
    }
}

/// Generated files, kept in memory until the study has finished.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
    /// Human-readable summary, one line per level.
    pub summary: Vec<String>,
}

/// Scientific notation with 10 significant digits.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.9e}")
}

fn csv_header(cfg: &RunConfig, columns: &[&str]) -> String {
    format!("# {}\n{}\n", cfg.echo(), columns.join(","))
}

fn log_level(log: &mut String, title: &str, stats: &[SlabStats]) {
    let _ = writeln!(log, "{title}");
    let _ = writeln!(log, "slab,t_end,iterations,residual,seconds");
    for s in stats {
        let _ = writeln!(
            log,
            "{},{},{},{},{:.6}",
            s.slab,
            fmt_num(s.t_end),
            s.iterations,
            fmt_num(s.residual),
            s.seconds
        );
    }
}

fn convergence_outcome(cfg: &RunConfig, rows: &[ConvergenceRow]) -> Outcome {
    let mut csv = csv_header(
        cfg,
        &["level", "h", "tau", "err_grad_u", "err_v", "err_p", "eoc_grad_u", "eoc_v", "eoc_p"],
    );
    let mut log = format!("# {}\n", cfg.echo());
    let mut summary = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let eocs: Vec<String> = (0..3)
            .map(|c| match i.checked_sub(1).map(|j| &rows[j]) {
                Some(prev) => fmt_num((prev.errors[c] / row.errors[c]).ln() / (prev.h / row.h).ln()),
                None => String::new(),
            })
            .collect();
        let errs: Vec<String> = row.errors.iter().map(|e| fmt_num(*e)).collect();
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            row.level,
            fmt_num(row.h),
            fmt_num(row.tau),
            errs.join(","),
            eocs.join(",")
        );
        let title = format!(
            "level {}: h = {}, tau = {}, {} unknowns per slab, {} stored entries, {:.3} s",
            row.level,
            fmt_num(row.h),
            fmt_num(row.tau),
            row.n_unknowns,
            row.nnz,
            row.seconds
        );
        log_level(&mut log, &title, &row.stats);
        summary.push(format!(
            "level {}: errors grad u {}, v {}, p {}; EOC {}",
            row.level,
            errs[0],
            errs[1],
            errs[2],
            if i == 0 { "-".to_string() } else { eocs.join(" ") }
        ));
    }
    Outcome {
        files: vec![("convergence.csv".into(), csv), ("run.log".into(), log)],
        summary,
    }
}

fn benchmark_outcome(cfg: &RunConfig, runs: &[BenchmarkRun]) -> Outcome {
    let mut goals = csv_header(cfg, &["level", "t", "G_u", "G_p"]);
    let mut chars = csv_header(
        cfg,
        &["level", "h", "tau", "min_G_p", "max_G_p", "min_G_u", "max_G_u", "period_G_u", "period_G_p"],
    );
    let mut log = format!("# {}\n", cfg.echo());
    let mut summary = Vec::new();
    for run in runs {
        let s = &run.series;
        for i in 0..s.t.len() {
            let _ = writeln!(goals, "{},{},{},{}", run.level, fmt_num(s.t[i]), fmt_num(s.gu[i]), fmt_num(s.gp[i]));
        }
        let c: Vec<String> = match &run.characteristics {
            Some(c) => c.as_array().iter().map(|v| fmt_num(*v)).collect(),
            None => vec![String::new(); 4],
        };
        let p: Vec<String> = match run.periods {
            Some((pu, pp)) => vec![fmt_num(pu), fmt_num(pp)],
            None => vec![String::new(); 2],
        };
        let _ = writeln!(
            chars,
            "{},{},{},{},{}",
            run.level,
            fmt_num(run.h),
            fmt_num(run.tau),
            c.join(","),
            p.join(",")
        );
        let title = format!(
            "level {}: h = {}, tau = {}, {} unknowns per slab, {} stored entries, {:.3} s",
            run.level,
            fmt_num(run.h),
            fmt_num(run.tau),
            run.n_unknowns,
            run.nnz,
            run.seconds
        );
        log_level(&mut log, &title, &run.stats);
        summary.push(format!(
            "level {}: min/max G_p {} {}, min/max G_u {} {}",
            run.level, c[0], c[1], c[2], c[3]
        ));
    }
    Outcome {
        files: vec![
            ("goals.csv".into(), goals),
            ("characteristics.csv".into(), chars),
            ("run.log".into(), log),
        ],
        summary,
    }
}

/// Runs the configured study without touching the file system.
pub fn execute(cfg: &RunConfig, mut progress: impl FnMut(&str)) -> Result<Outcome> {
    let disc = cfg.discretization();
    match cfg.case {
        CaseKind::Manufactured => {
            let rows = convergence_study(&cfg.manufactured, &disc, &cfg.levels, |row| {
                progress(&format!("level {} done in {:.1} s", row.level, row.seconds));
            })?;
            Ok(convergence_outcome(cfg, &rows))
        }
        CaseKind::Benchmark => {
            let mut runs = Vec::new();
            for &level in &cfg.levels {
                let run = benchmark_run(&cfg.benchmark, &disc, level).map_err(|e| Error::LevelFailed {
                    level,
                    source: Box::new(e),
                })?;
                progress(&format!("level {level} done in {:.1} s", run.seconds));
                runs.push(run);
            }
            Ok(benchmark_outcome(cfg, &runs))
        }
    }
}

/// Creates `dir` if needed and checks that files can be written there.
pub fn prepare_output_dir(dir: &Path) -> Result<()> {
    if dir.exists() && !dir.is_dir() {
        return Err(Error::Io(std::io::Error::new(
            std::io::ErrorKind::AlreadyExists,
            format!("{} exists and is not a directory", dir.display()),
        )));
    }
    fs::create_dir_all(dir)?;
    let probe = dir.join(".biot-st-write-check");
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)?;
    Ok(())
}

/// Writes all files or none: each goes to a temporary name first and is
/// renamed once every write has succeeded.
pub fn write_outcome(dir: &Path, outcome: &Outcome) -> Result<Vec<PathBuf>> {
    let mut staged = Vec::new();
    for (name, contents) in &outcome.files {
        let tmp = dir.join(format!(".{name}.partial"));
        if let Err(e) = fs::write(&tmp, contents) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            let _ = fs::remove_file(&tmp);
            return Err(e.into());
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut written = Vec::new();
    for (tmp, dst) in staged {
        fs::rename(&tmp, &dst)?;
        written.push(dst);
    }
    Ok(written)
}

/// Validates the output directory, runs the study and writes its artifacts.
pub fn run(cfg: &RunConfig, progress: impl FnMut(&str)) -> Result<(Outcome, Vec<PathBuf>)> {
    prepare_output_dir(&cfg.out)?;
    let outcome = execute(cfg, progress)?;
    let written = write_outcome(&cfg.out, &outcome)?;
    Ok((outcome, written))
}
