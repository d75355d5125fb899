//! Nodes and weights of the Gauss, right Gauss-Radau and Gauss-Lobatto rules,
//! with a monomial exactness check on `[-1, 1]`.
//!
//! Usage: cargo run --example quadrature_rules -- [max_points]

use biot_st::quadrature::{gauss_legendre, gauss_lobatto, gauss_radau_right, map_to_interval, QuadRule};

fn exact_monomial(m: usize) -> f64 {
    if m % 2 == 1 {
        0.0
    } else {
        2.0 / (m as f64 + 1.0)
    }
}

/// Highest degree `d` such that all monomials up to `d` integrate to 1e-13.
fn observed_exactness(rule: &QuadRule) -> usize {
    (0..)
        .find(|&m| (rule.integrate(|x| x.powi(m as i32)) - exact_monomial(m)).abs() > 1e-13)
        .unwrap()
        - 1
}

fn show(name: &str, rule: &QuadRule) {
    println!(
        "{name} with {} points: exact to degree {} (observed {})",
        rule.len(),
        rule.exactness_degree(),
        observed_exactness(rule)
    );
    for (x, w) in rule.points.iter().zip(&rule.weights) {
        println!("    x = {x:>+.16}  w = {w:.16}");
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let max: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    for n in 1..=max {
        show("Gauss-Legendre", &gauss_legendre(n)?);
        show("Gauss-Radau (right)", &gauss_radau_right(n)?);
        if n >= 2 {
            show("Gauss-Lobatto", &gauss_lobatto(n)?);
        }
    }
    // rules on a time slab: integral of t^2 over (1, 1.5)
    let slab = map_to_interval(&gauss_radau_right(3)?, 1.0, 1.5)?;
    let integral = slab.integrate(|t| t * t);
    println!("Radau(3) on (1, 1.5): int t^2 dt = {integral:.15} (exact {:.15})", (1.5f64.powi(3) - 1.0) / 3.0);
    Ok(())
}
