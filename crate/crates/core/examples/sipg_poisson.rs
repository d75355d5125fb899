//! Interior penalty discretization of `-div(K grad p) = f` on the broken
//! pressure space, with `p = sin(pi x) sin(pi y)` and weak Dirichlet data on
//! the whole boundary. Prints L2 errors and observed orders.
//!
//! Usage: cargo run --example sipg_poisson -- [degree] [levels]

use std::f64::consts::PI;
use std::sync::Arc;

use biot_st::assembly::{assemble_mass, assemble_pressure_sipg, MaterialParams};
use biot_st::linalg::solve_direct;
use biot_st::mesh::{refine_uniform, unit_square_mesh};
use biot_st::quadrature::TensorRule;
use biot_st::spaces::build_p_disc_space;

fn exact(x: [f64; 2]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let degree: usize = args.first().map(|s| s.parse()).transpose()?.unwrap_or(2);
    let levels: usize = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    // only K and gamma_b matter for the pressure form
    let params = MaterialParams::isotropic(1.0, 1.0, 1.0, 1.0, 1.0, 0.3, degree + 1)?;
    let rule = TensorRule::gauss(degree + 3)?;
    let mut mesh = unit_square_mesh(2)?;
    let mut previous: Option<(f64, f64)> = None;
    for level in 0..levels {
        let space = build_p_disc_space(Arc::new(mesh.clone()), degree)?;
        let b = assemble_pressure_sipg(&space, &params)?;
        let m = assemble_mass(&space, 1.0)?;
        let f = space.interpolate(|x| vec![2.0 * PI * PI * exact(x)]);
        let p = solve_direct(&b, &m.matvec(&f.coeffs)?)?;
        let ph = space.function(p)?;
        let mut err2 = 0.0;
        for cell in 0..mesh.n_cells() {
            let geo = mesh.cell_geometry(cell);
            for (xi, w) in rule.points.iter().zip(&rule.weights) {
                let d = ph.value(cell, *xi)[0] - exact(geo.map(*xi));
                err2 += w * geo.det_jacobian() * d * d;
            }
        }
        let (h, err) = (mesh.h(), err2.sqrt());
        let order = previous.map(|(h0, e0)| (e0 / err).ln() / (h0 / h).ln());
        println!(
            "level {level}: h = {h:.4e}, {} dofs, L2 error {err:.4e}, order {}",
            space.total_dofs(),
            order.map_or("-".into(), |o| format!("{o:.2}"))
        );
        previous = Some((h, err));
        mesh = refine_uniform(&mesh);
    }
    Ok(())
}
