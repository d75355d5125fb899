//! One-dimensional Gauss-Legendre, right-sided Gauss-Radau and Gauss-Lobatto
//! rules, their affine images on time intervals, and tensor rules on the
//! reference square.
//!
//! Nodes are computed by Newton iteration on the defining Legendre
//! polynomial conditions; no tables are involved.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Legendre,
    RadauRight,
    Lobatto,
}

/// A quadrature rule on `interval` (the reference interval `[-1, 1]` unless
/// the rule was produced by [`map_to_interval`]).
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
    pub interval: (f64, f64),
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exactness_degree(&self) -> usize {
        let n = self.len();
        match self.kind {
            RuleKind::Legendre => 2 * n - 1,
            RuleKind::RadauRight => 2 * n - 2,
            RuleKind::Lobatto => 2 * n - 3,
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Legendre polynomial `P_n` and its derivative at `x`.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut dp_prev, mut dp) = (0.0, 1.0);
    for m in 1..n {
        let mf = m as f64;
        let p_next = ((2.0 * mf + 1.0) * x * p - mf * p_prev) / (mf + 1.0);
        // P'_{m+1} = P'_{m-1} + (2m+1) P_m
        let dp_next = dp_prev + (2.0 * mf + 1.0) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    (p, dp)
}

/// Newton iteration on `f` starting from `x0`, deflating the roots found so far.
fn newton(f: impl Fn(f64) -> (f64, f64), x0: f64, found: &[f64]) -> f64 {
    let mut x = x0;
    for _ in 0..NEWTON_MAX_ITER {
        let (v, dv) = f(x);
        let deflation: f64 = found.iter().map(|&r| 1.0 / (x - r)).sum();
        let dx = v / (dv - v * deflation);
        x -= dx;
        if dx.abs() <= NEWTON_TOL * x.abs().max(1.0) {
            break;
        }
    }
    x
}

fn check_range(name: &str, n: usize, lo: usize, hi: usize) -> Result<()> {
    if n < lo || n > hi {
        return Err(Error::invalid(format!(
            "{name}: number of points {n} outside [{lo}, {hi}]"
        )));
    }
    Ok(())
}

fn finish(mut pts: Vec<(f64, f64)>, kind: RuleKind) -> QuadRule {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    QuadRule {
        points: pts.iter().map(|p| p.0).collect(),
        weights: pts.iter().map(|p| p.1).collect(),
        kind,
        interval: (-1.0, 1.0),
    }
}

/// `n`-point Gauss-Legendre rule, `1 <= n <= 20`.
pub fn gauss_legendre(n: usize) -> Result<QuadRule> {
    check_range("gauss_legendre", n, 1, 20)?;
    let mut roots = Vec::with_capacity(n);
    for i in 0..n {
        let guess = -(std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let x = newton(|x| legendre(n, x), guess, &roots);
        roots.push(x);
    }
    let pts = roots
        .into_iter()
        .map(|x| {
            let (_, dp) = legendre(n, x);
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect();
    Ok(finish(pts, RuleKind::Legendre))
}

/// `n`-point Gauss-Radau rule containing the right endpoint `+1`, `1 <= n <= 12`.
pub fn gauss_radau_right(n: usize) -> Result<QuadRule> {
    check_range("gauss_radau_right", n, 1, 12)?;
    let nf = n as f64;
    // Left-sided rule: free nodes are the roots of P_{n-1} + P_n other than -1.
    // The right-sided rule is its mirror image.
    let mut pts = vec![(1.0, 2.0 / (nf * nf))];
    let mut roots = vec![-1.0];
    for i in 1..n {
        let guess = -(2.0 * std::f64::consts::PI * i as f64 / (2.0 * nf - 1.0)).cos();
        let x = newton(
            |x| {
                let (a, da) = legendre(n - 1, x);
                let (b, db) = legendre(n, x);
                (a + b, da + db)
            },
            guess,
            &roots,
        );
        roots.push(x);
        let (p, _) = legendre(n - 1, x);
        pts.push((-x, (1.0 - x) / (nf * nf * p * p)));
    }
    Ok(finish(pts, RuleKind::RadauRight))
}

/// `n`-point Gauss-Lobatto rule containing both endpoints, `2 <= n <= 12`.
pub fn gauss_lobatto(n: usize) -> Result<QuadRule> {
    check_range("gauss_lobatto", n, 2, 12)?;
    let nf = n as f64;
    let m = n - 1;
    let endpoint_weight = 2.0 / (nf * (nf - 1.0));
    let mut pts = vec![(-1.0, endpoint_weight), (1.0, endpoint_weight)];
    let mut roots = Vec::new();
    let mf = m as f64;
    for i in 1..m {
        let guess = -(std::f64::consts::PI * i as f64 / mf).cos();
        // interior nodes are roots of P'_m; (1 - x^2) P''_m = 2x P'_m - m(m+1) P_m
        let x = newton(
            |x| {
                let (p, dp) = legendre(m, x);
                let ddp = (2.0 * x * dp - mf * (mf + 1.0) * p) / (1.0 - x * x);
                (dp, ddp)
            },
            guess,
            &roots,
        );
        roots.push(x);
        let (p, _) = legendre(m, x);
        pts.push((x, endpoint_weight / (p * p)));
    }
    Ok(finish(pts, RuleKind::Lobatto))
}

/// Affine image of a reference rule on `[t_start, t_end]`:
/// `t = (t_start + t_end)/2 + (t_end - t_start)/2 * t_hat`, weights scaled by
/// half the interval length.
pub fn map_to_interval(rule: &QuadRule, t_start: f64, t_end: f64) -> Result<QuadRule> {
    if !(t_start < t_end) {
        return Err(Error::invalid(format!(
            "empty interval [{t_start}, {t_end}]"
        )));
    }
    let (a, b) = rule.interval;
    let scale = (t_end - t_start) / (b - a);
    Ok(QuadRule {
        points: rule
            .points
            .iter()
            .map(|&x| t_start + (x - a) * scale)
            .collect(),
        weights: rule.weights.iter().map(|&w| w * scale).collect(),
        kind: rule.kind,
        interval: (t_start, t_end),
    })
}

/// Tensor-product rule on the reference square `[-1, 1]^2`. Points are ordered
/// with the first coordinate running fastest.
#[derive(Debug, Clone)]
pub struct TensorRule {
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
}

impl TensorRule {
    pub fn new(rule: &QuadRule) -> Self {
        let n = rule.len();
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                points.push([rule.points[i], rule.points[j]]);
                weights.push(rule.weights[i] * rule.weights[j]);
            }
        }
        Self { points, weights }
    }

    pub fn gauss(n: usize) -> Result<Self> {
        Ok(Self::new(&gauss_legendre(n)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn monomial_integral(m: usize) -> f64 {
        if m % 2 == 1 {
            0.0
        } else {
            2.0 / (m as f64 + 1.0)
        }
    }

    fn check_exactness(rule: &QuadRule) {
        let deg = rule.exactness_degree();
        for m in 0..=deg {
            let q = rule.integrate(|x| x.powi(m as i32));
            assert!(
                (q - monomial_integral(m)).abs() < 1e-13,
                "{:?} n={} m={m}: {q}",
                rule.kind,
                rule.len()
            );
        }
        // the first even degree beyond exactness must fail
        let mut m = deg + 1;
        if m % 2 == 1 {
            m += 1;
        }
        let q = rule.integrate(|x| x.powi(m as i32));
        assert!((q - monomial_integral(m)).abs() > 1e-13, "{:?} n={} m={m}", rule.kind, rule.len());
    }

    fn check_shape(rule: &QuadRule) {
        let sum: f64 = rule.weights.iter().sum();
        assert!((sum - 2.0).abs() < 1e-14);
        assert!(rule.weights.iter().all(|&w| w > 0.0));
        assert!(rule.points.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn legendre_small_cases() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.points, vec![0.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);

        let r = gauss_legendre(2).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert!((r.points[0] + s).abs() < 1e-15 && (r.points[1] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);

        let r = gauss_legendre(3).unwrap();
        assert!((r.integrate(|x| x.powi(4)) - 0.4).abs() < 1e-14);
    }

    #[test]
    fn radau_small_cases() {
        let r = gauss_radau_right(1).unwrap();
        assert_eq!(r.points, vec![1.0]);
        assert!((r.weights[0] - 2.0).abs() < 1e-15);

        let r = gauss_radau_right(2).unwrap();
        assert!((r.points[0] + 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.points[1], 1.0);
        assert!((r.weights[0] - 1.5).abs() < 1e-15);
        assert!((r.weights[1] - 0.5).abs() < 1e-15);
        assert!((r.integrate(|x| x * x) - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.integrate(|x| x.powi(3)) - 4.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn lobatto_small_cases() {
        let r = gauss_lobatto(2).unwrap();
        assert_eq!(r.points, vec![-1.0, 1.0]);
        assert_eq!(r.weights, vec![1.0, 1.0]);

        let r = gauss_lobatto(3).unwrap();
        assert!(r.points[1].abs() < 1e-15);
        let expect = [1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0];
        for (w, e) in r.weights.iter().zip(expect) {
            assert!((w - e).abs() < 1e-15);
        }

        let r = gauss_lobatto(4).unwrap();
        let s = 1.0 / 5f64.sqrt();
        assert!((r.points[1] + s).abs() < 1e-15 && (r.points[2] - s).abs() < 1e-15);
        assert!((r.weights[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((r.weights[1] - 5.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn exactness_all_rules() {
        for n in 1..=20 {
            let r = gauss_legendre(n).unwrap();
            check_shape(&r);
            check_exactness(&r);
        }
        for n in 1..=12 {
            let r = gauss_radau_right(n).unwrap();
            check_shape(&r);
            assert_eq!(*r.points.last().unwrap(), 1.0);
            check_exactness(&r);
        }
        for n in 2..=12 {
            let r = gauss_lobatto(n).unwrap();
            check_shape(&r);
            assert_eq!(r.points[0], -1.0);
            assert_eq!(*r.points.last().unwrap(), 1.0);
            check_exactness(&r);
        }
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(gauss_legendre(0).is_err());
        assert!(gauss_legendre(21).is_err());
        assert!(gauss_radau_right(0).is_err());
        assert!(gauss_radau_right(13).is_err());
        assert!(gauss_lobatto(1).is_err());
        assert!(gauss_lobatto(13).is_err());
    }

    #[test]
    fn interval_maps() {
        let r = map_to_interval(&gauss_lobatto(2).unwrap(), 0.0, 0.1).unwrap();
        assert_eq!(r.points, vec![0.0, 0.1]);
        assert!((r.weights[0] - 0.05).abs() < 1e-15 && (r.weights[1] - 0.05).abs() < 1e-15);

        let r = map_to_interval(&gauss_radau_right(2).unwrap(), 0.0, 1.0).unwrap();
        assert!((r.points[0] - 1.0 / 3.0).abs() < 1e-15 && r.points[1] == 1.0);
        assert!((r.weights[0] - 0.75).abs() < 1e-15 && (r.weights[1] - 0.25).abs() < 1e-15);

        for n in 1..=8 {
            let r = map_to_interval(&gauss_legendre(n).unwrap(), 0.3, 1.7).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.4).abs() < 1e-14);
        }
        assert!(map_to_interval(&gauss_legendre(2).unwrap(), 1.0, 1.0).is_err());
    }

    #[test]
    fn tensor_rule_integrates_products() {
        let t = TensorRule::gauss(3).unwrap();
        let q: f64 = t
            .points
            .iter()
            .zip(&t.weights)
            .map(|(p, w)| w * p[0].powi(4) * p[1].powi(2))
            .sum();
        assert!((q - 0.4 * 2.0 / 3.0).abs() < 1e-14);
    }
}
