//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment. Later assignments win, and
//! command-line flags are applied after the file. Physical parameters apply
//! to whichever case the study runs.

use std::path::{Path, PathBuf};

use crate::assembly::{lame_from_e_nu, AssemblyOptions};
use crate::error::ConfigError;
use crate::linalg::GmresOptions;
use crate::mesh::LShapeSide;
use crate::problems::{BenchmarkCase, ManufacturedCase, TractionDirection};
use crate::study::Discretization;
use crate::timeslab::{Scheme, SolverChoice};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Study {
    Convergence,
    Benchmark,
    /// One level of the case selected by `case`.
    SingleRun,
}

impl Study {
    pub fn as_str(self) -> &'static str {
        match self {
            Study::Convergence => "convergence",
            Study::Benchmark => "benchmark",
            Study::SingleRun => "single-run",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseKind {
    Manufactured,
    Benchmark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverName {
    Direct,
    DirectMonolithic,
    Gmres,
}

impl SolverName {
    pub fn as_str(self) -> &'static str {
        match self {
            SolverName::Direct => "direct",
            SolverName::DirectMonolithic => "direct-monolithic",
            SolverName::Gmres => "gmres",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub study: Study,
    /// Case used by [`Study::SingleRun`]; fixed by the other studies.
    pub case: CaseKind,
    pub scheme: Scheme,
    pub k: usize,
    pub r: usize,
    pub levels: Vec<usize>,
    pub solver: SolverName,
    pub gmres: GmresOptions,
    pub out: PathBuf,
    pub assembly: AssemblyOptions,
    pub manufactured: ManufacturedCase,
    pub benchmark: BenchmarkCase,
}

fn invalid(key: &str, value: &str, expected: &str) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        expected: expected.to_string(),
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str, expected: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| invalid(key, value, expected))
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = parse_num(key, value, "a positive number")?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(invalid(key, value, "a positive number"))
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty())
}

/// Plain decimal for moderate magnitudes, exponent form otherwise; both
/// round-trip exactly.
fn num(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn both(x: f64) -> (f64, f64) {
    (x, x)
}

/// Splits config text into `(key, value)` pairs.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| invalid(line, "", "a `key = value` line"))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

impl RunConfig {
    /// Documented defaults for `study`.
    pub fn defaults(study: Study) -> Self {
        let (case, r, levels) = match study {
            Study::Benchmark => (CaseKind::Benchmark, 3, vec![0, 1]),
            Study::Convergence => (CaseKind::Manufactured, 4, vec![0, 1, 2]),
            Study::SingleRun => (CaseKind::Manufactured, 4, vec![0]),
        };
        Self {
            study,
            case,
            scheme: Scheme::DG,
            k: 2,
            r,
            levels,
            solver: SolverName::Direct,
            gmres: GmresOptions::default(),
            out: PathBuf::from("out"),
            assembly: AssemblyOptions::default(),
            manufactured: ManufacturedCase::default(),
            benchmark: BenchmarkCase::default(),
        }
    }

    /// Builds a config from `pairs`; `study` overrides any `study` key.
    pub fn from_pairs(study: Option<Study>, pairs: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut chosen = Study::Convergence;
        for (key, value) in pairs {
            if key == "study" {
                chosen = match value.as_str() {
                    "convergence" => Study::Convergence,
                    "benchmark" => Study::Benchmark,
                    "single-run" | "run" => Study::SingleRun,
                    _ => return Err(invalid(key, value, "one of convergence, benchmark, single-run")),
                };
            }
        }
        let mut cfg = Self::defaults(study.unwrap_or(chosen));
        if cfg.study == Study::SingleRun {
            if let Some((_, v)) = pairs.iter().rev().find(|(k, _)| k == "case") {
                if v == "benchmark" {
                    cfg = Self {
                        case: CaseKind::Benchmark,
                        r: 3,
                        ..cfg
                    };
                }
            }
        }
        for (key, value) in pairs {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(study: Option<Study>, path: &Path, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut pairs = parse_pairs(&std::fs::read_to_string(path)?)?;
        pairs.extend_from_slice(overrides);
        Self::from_pairs(study, &pairs)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let (m, b) = (&mut self.manufactured, &mut self.benchmark);
        match key {
            "study" => {}
            "case" => match value {
                "manufactured" | "benchmark" if self.study == Study::SingleRun => {}
                "manufactured" if self.study == Study::Convergence => {}
                "benchmark" if self.study == Study::Benchmark => {}
                _ => return Err(invalid(key, value, "manufactured or benchmark, matching the study")),
            },
            "scheme" => {
                self.scheme = Scheme::parse(value).ok_or_else(|| invalid(key, value, "dG or cG"))?;
            }
            "k" => self.k = parse_num(key, value, "an integer >= 0")?,
            "r" => self.r = parse_num(key, value, "an integer >= 2")?,
            "levels" => {
                let parsed: Result<Vec<usize>, _> = list(value).map(|s| s.parse()).collect();
                self.levels = parsed.map_err(|_| invalid(key, value, "a list of levels such as 0,1,2"))?;
            }
            "solver" => {
                self.solver = match value {
                    "direct" => SolverName::Direct,
                    "direct-monolithic" => SolverName::DirectMonolithic,
                    "gmres" => SolverName::Gmres,
                    _ => return Err(invalid(key, value, "gmres, direct or direct-monolithic")),
                };
            }
            "gmres_rtol" => self.gmres.rel_tol = positive(key, value)?,
            "gmres_max_iter" | "gmres_restart" => {
                let n: usize = parse_num(key, value, "a positive integer")?;
                if n == 0 {
                    return Err(invalid(key, value, "a positive integer"));
                }
                if key == "gmres_restart" {
                    self.gmres.restart = n;
                } else {
                    self.gmres.max_iter = n;
                }
            }
            "out" => self.out = PathBuf::from(value),
            "effective_stress_neumann" => {
                self.assembly.effective_stress_neumann = parse_num(key, value, "true or false")?;
            }
            "rho" => (m.rho, b.rho) = both(positive(key, value)?),
            "alpha" => (m.alpha, b.alpha) = both(positive(key, value)?),
            "c0" => (m.c0, b.c0) = both(positive(key, value)?),
            "kappa" => (m.k, b.k) = both(positive(key, value)?),
            "E" => (m.youngs, b.youngs) = both(positive(key, value)?),
            "nu" => {
                let nu: f64 = parse_num(key, value, "a number in [0, 0.5)")?;
                if !(0.0..0.5).contains(&nu) {
                    return Err(invalid(key, value, "a number in [0, 0.5)"));
                }
                (m.poisson, b.poisson) = both(nu);
            }
            "t_final" | "tau0" => {
                let x = positive(key, value)?;
                let slot = match (self.case, key) {
                    (CaseKind::Manufactured, "t_final") => &mut m.t_final,
                    (CaseKind::Manufactured, _) => &mut m.tau0,
                    (CaseKind::Benchmark, "t_final") => &mut b.t_final,
                    (CaseKind::Benchmark, _) => &mut b.tau0,
                };
                *slot = x;
            }
            "omega1" => m.omega1 = parse_num(key, value, "a number")?,
            "omega2" => m.omega2 = parse_num(key, value, "a number")?,
            "base_cells" => {
                m.base_cells = parse_num(key, value, "a positive integer")?;
                if m.base_cells == 0 {
                    return Err(invalid(key, value, "a positive integer"));
                }
            }
            "load_end" => b.load_end = positive(key, value)?,
            "freq" => b.freq = parse_num(key, value, "a number")?,
            "traction_direction" => {
                b.direction = match value {
                    "vertical" => TractionDirection::Vertical,
                    "normal" => TractionDirection::Normal,
                    _ => return Err(invalid(key, value, "vertical or normal")),
                }
            }
            "notch_x" => b.geometry.notch_x = positive(key, value)?,
            "notch_y" => b.geometry.notch_y = positive(key, value)?,
            "coarse_size" => b.geometry.coarse_size = positive(key, value)?,
            "rollers" => {
                let expected = "a list of bottom, left, top, right, notch_vertical, notch_horizontal";
                b.geometry.rollers = list(value)
                    .map(|s| LShapeSide::parse(s).ok_or_else(|| invalid(key, value, expected)))
                    .collect::<Result<_, _>>()?;
            }
            "pressure_dirichlet" => {
                let ends: Vec<f64> = list(value)
                    .map(|s| s.parse())
                    .collect::<Result<_, _>>()
                    .map_err(|_| invalid(key, value, "two numbers a,b with a <= b"))?;
                match ends[..] {
                    [a, c] if a <= c => b.geometry.pressure_dirichlet = (a, c),
                    _ => return Err(invalid(key, value, "two numbers a,b with a <= b")),
                }
            }
            _ => return Err(ConfigError::UnknownKey { key: key.to_string() }),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.scheme == Scheme::CG && self.k == 0 {
            return Err(invalid("k", "0", "k >= 1 for cG"));
        }
        if self.r < 2 {
            return Err(invalid("r", &self.r.to_string(), "an integer >= 2"));
        }
        if self.levels.is_empty() {
            return Err(invalid("levels", "", "a non-empty list of levels"));
        }
        if self.study == Study::SingleRun && self.levels.len() != 1 {
            return Err(invalid("levels", &self.level_list(), "exactly one level for single-run"));
        }
        let (t_final, tau0) = self.time_span();
        let steps = t_final / tau0;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) || steps.round() < 1.0 {
            return Err(invalid("tau0", &tau0.to_string(), "a step that divides t_final"));
        }
        let g = &self.benchmark.geometry;
        if self.case == CaseKind::Benchmark && !(g.notch_x < 1.0 && g.notch_y < 1.0) {
            return Err(invalid("notch_x", &g.notch_x.to_string(), "a notch corner inside the unit square"));
        }
        Ok(())
    }

    fn time_span(&self) -> (f64, f64) {
        match self.case {
            CaseKind::Manufactured => (self.manufactured.t_final, self.manufactured.tau0),
            CaseKind::Benchmark => (self.benchmark.t_final, self.benchmark.tau0),
        }
    }

    fn level_list(&self) -> String {
        self.levels.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn solver_choice(&self) -> SolverChoice {
        match self.solver {
            SolverName::Direct => SolverChoice::Direct,
            SolverName::DirectMonolithic => SolverChoice::DirectMonolithic,
            SolverName::Gmres => SolverChoice::Gmres(self.gmres),
        }
    }

    pub fn discretization(&self) -> Discretization {
        Discretization {
            scheme: self.scheme,
            k: self.k,
            r: self.r,
            solver: self.solver_choice(),
            assembly: self.assembly,
        }
    }

    /// Full effective configuration as `(key, value)` pairs, followed by the
    /// derived Lamé parameters.
    pub fn effective(&self) -> Vec<(String, String)> {
        let mut out: Vec<(&str, String)> = vec![
            ("study", self.study.as_str().into()),
            (
                "case",
                match self.case {
                    CaseKind::Manufactured => "manufactured",
                    CaseKind::Benchmark => "benchmark",
                }
                .into(),
            ),
            ("scheme", self.scheme.as_str().into()),
            ("k", self.k.to_string()),
            ("r", self.r.to_string()),
            ("levels", self.level_list()),
            ("solver", self.solver.as_str().into()),
            ("gmres_rtol", num(self.gmres.rel_tol)),
            ("gmres_max_iter", self.gmres.max_iter.to_string()),
            ("gmres_restart", self.gmres.restart.to_string()),
            ("out", self.out.display().to_string()),
            ("effective_stress_neumann", self.assembly.effective_stress_neumann.to_string()),
        ];
        let (m, b) = (&self.manufactured, &self.benchmark);
        let (rho, alpha, c0, kappa, e, nu) = match self.case {
            CaseKind::Manufactured => (m.rho, m.alpha, m.c0, m.k, m.youngs, m.poisson),
            CaseKind::Benchmark => (b.rho, b.alpha, b.c0, b.k, b.youngs, b.poisson),
        };
        let (t_final, tau0) = self.time_span();
        for (key, v) in [("rho", rho), ("alpha", alpha), ("c0", c0), ("kappa", kappa), ("E", e), ("nu", nu)] {
            out.push((key, num(v)));
        }
        out.push(("t_final", num(t_final)));
        out.push(("tau0", num(tau0)));
        match self.case {
            CaseKind::Manufactured => {
                out.push(("omega1", num(m.omega1)));
                out.push(("omega2", num(m.omega2)));
                out.push(("base_cells", m.base_cells.to_string()));
            }
            CaseKind::Benchmark => {
                let g = &b.geometry;
                out.push(("load_end", num(b.load_end)));
                out.push(("freq", num(b.freq)));
                let dir = match b.direction {
                    TractionDirection::Vertical => "vertical",
                    TractionDirection::Normal => "normal",
                };
                out.push(("traction_direction", dir.into()));
                out.push(("notch_x", num(g.notch_x)));
                out.push(("notch_y", num(g.notch_y)));
                out.push(("coarse_size", num(g.coarse_size)));
                let rollers: Vec<&str> = g.rollers.iter().map(|s| s.as_str()).collect();
                out.push(("rollers", rollers.join(",")));
                out.push((
                    "pressure_dirichlet",
                    format!("{},{}", num(g.pressure_dirichlet.0), num(g.pressure_dirichlet.1)),
                ));
            }
        }
        if let Ok((lambda, mu)) = lame_from_e_nu(e, nu) {
            out.push(("lambda", format!("{lambda:.2}")));
            out.push(("mu", format!("{mu:.2}")));
        }
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    /// One-line echo of [`RunConfig::effective`].
    pub fn echo(&self) -> String {
        self.effective().iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ")
    }
}
