//! L-shaped benchmark: pulsed traction on the upper left boundary, rollers,
//! and boundary goal quantities on the notch side `{0.75} x (0, 0.5)`.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::assembly::{MaterialParams, ProblemData};
use crate::error::{Error, Result};
use crate::mesh::{l_shaped_mesh_with, LShapeConfig, Mesh};
use crate::spaces::{face_rule, FunctionSpace};
use crate::timeslab::{Field, SlabSolution};

/// Direction in which the scalar traction profile acts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TractionDirection {
    /// Along `e2`.
    Vertical,
    /// Along the outward normal of the loaded face.
    Normal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkCase {
    pub rho: f64,
    pub alpha: f64,
    pub c0: f64,
    pub k: f64,
    pub youngs: f64,
    pub poisson: f64,
    pub t_final: f64,
    /// Level-0 time step; the default gives 32 steps per forcing period.
    pub tau0: f64,
    pub geometry: LShapeConfig,
    /// Loaded part of the top boundary, `x` in `[0, load_end]`.
    pub load_end: f64,
    pub direction: TractionDirection,
    /// Forcing frequency: the load is `q(x) sin(freq * t)`.
    pub freq: f64,
}

impl Default for BenchmarkCase {
    fn default() -> Self {
        Self {
            rho: 1.0,
            alpha: 0.9,
            c0: 0.01,
            k: 1.0,
            youngs: 20000.0,
            poisson: 0.3,
            t_final: 8.0,
            tau0: 1.0 / 128.0,
            geometry: LShapeConfig::default(),
            load_end: 0.5,
            direction: TractionDirection::Vertical,
            freq: 8.0 * PI,
        }
    }
}

/// Spatial profile of the traction pulse on `[0, 0.5]`; zero elsewhere.
pub fn traction_profile(x: f64) -> Result<f64> {
    if !(0.0..=0.5).contains(&x) {
        return Err(Error::invalid(format!("traction profile defined on [0, 0.5], got {x}")));
    }
    Ok(if x <= 0.125 {
        -64.0 * x * x * (16.0 * x - 3.0)
    } else {
        16.0 / 27.0 * (2.0 * x - 1.0).powi(2) * (16.0 * x + 1.0)
    })
}

impl BenchmarkCase {
    pub fn params(&self, r: usize) -> Result<MaterialParams> {
        MaterialParams::isotropic(self.rho, self.alpha, self.c0, self.k, self.youngs, self.poisson, r)
    }

    pub fn mesh(&self, level: usize) -> Result<Arc<Mesh>> {
        Ok(Arc::new(l_shaped_mesh_with(level, &self.geometry)?))
    }

    pub fn n_slabs(&self, level: usize) -> usize {
        ((self.t_final / self.tau0).round() as usize) << level
    }

    /// Traction vector at boundary point `x`, time `t`.
    pub fn traction(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let on_load = (x[1] - 1.0).abs() < 1e-12 && x[0] <= self.load_end + 1e-12;
        if !on_load {
            return [0.0; 2];
        }
        let q = traction_profile(x[0].clamp(0.0, 0.5)).unwrap_or(0.0) * (self.freq * t).sin();
        match self.direction {
            // the loaded face is on the top boundary, whose normal is e2
            TractionDirection::Vertical | TractionDirection::Normal => [0.0, q],
        }
    }

    pub fn data(&self) -> ProblemData {
        let me = self.clone();
        let mut d = ProblemData::homogeneous();
        d.t_n = Some(Box::new(move |x, t| me.traction(x, t)));
        d
    }
}

/// Linear functionals `G_u = int u.n` and `G_p = int p` over the goal faces.
#[derive(Debug, Clone)]
pub struct GoalFunctionals {
    pub gu: Vec<f64>,
    pub gp: Vec<f64>,
    pub length: f64,
}

impl GoalFunctionals {
    /// Face quadrature with `r + 1` Gauss points on every goal face; the
    /// pressure is taken from the owning cell.
    pub fn new(vspace: &FunctionSpace, pspace: &FunctionSpace) -> Result<Self> {
        let mesh = vspace.mesh();
        let faces = mesh.goal_faces();
        if faces.is_empty() {
            return Err(Error::invalid("mesh has no goal faces"));
        }
        let r = vspace.element().degree;
        let rule = face_rule(r);
        let mut gu = vec![0.0; vspace.total_dofs()];
        let mut gp = vec![0.0; pspace.total_dofs()];
        let mut length = 0.0;
        for f in faces {
            let face = &mesh.faces[f];
            let (cell, lf) = face.owner;
            let pts: Vec<[f64; 2]> = rule.points.iter().map(|&s| lf.reference_point(s)).collect();
            let vb = vspace.eval_basis(cell, &pts)?;
            let pb = pspace.eval_basis(cell, &pts)?;
            length += face.measure;
            for (q, &w) in rule.weights.iter().enumerate() {
                let w = w * 0.5 * face.measure;
                for (i, &s) in vspace.cell_dofs(cell).iter().enumerate() {
                    for c in 0..2 {
                        gu[vspace.dof(c, s)] += w * face.normal[c] * vb.values[q][i];
                    }
                }
                for (m, &d) in pspace.cell_dofs(cell).iter().enumerate() {
                    gp[d] += w * pb.values[q][m];
                }
            }
        }
        Ok(Self { gu, gp, length })
    }

    /// `(G_u, G_p)` for coefficient vectors `u` and `p`.
    pub fn evaluate(&self, u: &[f64], p: &[f64]) -> (f64, f64) {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        (dot(&self.gu, u), dot(&self.gp, p))
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GoalSeries {
    pub t: Vec<f64>,
    pub gu: Vec<f64>,
    pub gp: Vec<f64>,
}

impl GoalSeries {
    pub fn push(&mut self, t: f64, gu: f64, gp: f64) {
        self.t.push(t);
        self.gu.push(gu);
        self.gp.push(gp);
    }

    /// Samples a slab at `per_slab` equispaced interior points plus its end
    /// point (the start point belongs to the previous slab).
    pub fn add_slab(&mut self, slab: &SlabSolution, goals: &GoalFunctionals, per_slab: usize) {
        let n = per_slab.max(1);
        for j in 1..=n {
            let t = if j == n {
                slab.t_end
            } else {
                slab.t_start + (slab.t_end - slab.t_start) * j as f64 / n as f64
            };
            let (u, p) = if j == n {
                (slab.u.last().unwrap().clone(), slab.p.last().unwrap().clone())
            } else {
                (slab.eval(Field::U, t), slab.eval(Field::P, t))
            };
            let (gu, gp) = goals.evaluate(&u, &p);
            self.push(t, gu, gp);
        }
    }
}

/// Extrema of the goal quantities over a time window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalCharacteristics {
    pub min_gp: f64,
    pub max_gp: f64,
    pub min_gu: f64,
    pub max_gu: f64,
}

impl GoalCharacteristics {
    pub fn as_array(&self) -> [f64; 4] {
        [self.min_gp, self.max_gp, self.min_gu, self.max_gu]
    }
}

/// Min/max over the samples in `[t0, t1]`. The samples must cover the window
/// with spacing at most `max_spacing`.
pub fn goal_characteristics(series: &GoalSeries, window: (f64, f64), max_spacing: f64) -> Result<GoalCharacteristics> {
    let (t0, t1) = window;
    let eps = 1e-9 * t1.abs().max(1.0);
    let idx: Vec<usize> = (0..series.t.len())
        .filter(|&i| series.t[i] >= t0 - eps && series.t[i] <= t1 + eps)
        .collect();
    let covered = !idx.is_empty()
        && series.t[idx[0]] <= t0 + max_spacing + eps
        && series.t[*idx.last().unwrap()] >= t1 - eps
        && idx.windows(2).all(|w| series.t[w[1]] - series.t[w[0]] <= max_spacing + eps);
    if !covered {
        return Err(Error::invalid(format!("samples do not cover the window [{t0}, {t1}]")));
    }
    let fold = |v: &[f64]| {
        idx.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| (lo.min(v[i]), hi.max(v[i])))
    };
    let (min_gp, max_gp) = fold(&series.gp);
    let (min_gu, max_gu) = fold(&series.gu);
    Ok(GoalCharacteristics {
        min_gp,
        max_gp,
        min_gu,
        max_gu,
    })
}

/// Dominant period of uniformly sampled values `(t_i, y_i)` restricted to
/// `t >= t_from`, from the autocorrelation maximum after the first zero
/// crossing, refined by parabolic interpolation.
pub fn dominant_period(t: &[f64], y: &[f64], t_from: f64) -> Result<f64> {
    let start = t.iter().position(|&s| s >= t_from).unwrap_or(t.len());
    let (t, y) = (&t[start..], &y[start..]);
    if t.len() < 8 {
        return Err(Error::invalid("too few samples for a period estimate"));
    }
    let dt = (t[t.len() - 1] - t[0]) / (t.len() - 1) as f64;
    if t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::invalid("period estimate needs uniform sampling"));
    }
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let z: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let n = z.len();
    let max_lag = n / 2;
    let ac: Vec<f64> = (0..=max_lag)
        .map(|l| (0..n - l).map(|i| z[i] * z[i + l]).sum::<f64>() / (n - l) as f64)
        .collect();
    if ac[0] <= 0.0 {
        return Err(Error::invalid("constant signal has no period"));
    }
    let first_neg = ac
        .iter()
        .position(|&a| a < 0.0)
        .ok_or_else(|| Error::invalid("autocorrelation never changes sign"))?;
    // argmax over the first positive lobe after the first zero crossing, so
    // ripples from weaker high frequencies do not count as peaks
    let lobe_start = (first_neg..max_lag)
        .find(|&l| ac[l] >= 0.0)
        .ok_or_else(|| Error::invalid("no autocorrelation peak found"))?;
    let lobe_end = (lobe_start..max_lag).find(|&l| ac[l] < 0.0).unwrap_or(max_lag);
    let best = (lobe_start..lobe_end).max_by(|&a, &b| ac[a].total_cmp(&ac[b])).unwrap_or(lobe_start);
    if best == 0 || best + 1 >= max_lag {
        return Err(Error::invalid("no autocorrelation peak found"));
    }
    let refine = |l: usize| {
        let (a, b, c) = (ac[l - 1], ac[l], ac[l + 1]);
        let denom = a - 2.0 * b + c;
        l as f64 + if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 }
    };
    // Peaks near higher multiples, divided by the multiple, shrink the shift
    // caused by other frequencies; doubling keeps each search window centred.
    let mut period = refine(best);
    let mut m = 2.0;
    while (m + 1.0) * period < (max_lag - 2) as f64 {
        let centre = (m * period).round() as usize;
        let half = (period / 4.0).ceil() as usize;
        let (lo, hi) = (centre.saturating_sub(half).max(1), centre + half);
        let far = (lo..=hi).max_by(|&a, &b| ac[a].total_cmp(&ac[b])).unwrap_or(centre);
        if far == lo || far == hi {
            break;
        }
        period = refine(far) / m;
        m *= 2.0;
    }
    Ok(period * dt)
}
