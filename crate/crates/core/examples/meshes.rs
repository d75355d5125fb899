//! Unit-square and L-shaped meshes under uniform refinement: cell and face
//! counts, boundary tags, and an optional plain-text dump.
//!
//! Usage: cargo run --example meshes -- [max_level] [dump_file]

use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufWriter;

use biot_st::mesh::{l_shaped_mesh, refine_uniform, unit_square_mesh, Mesh};

fn describe(name: &str, level: usize, mesh: &Mesh) {
    let mut tags: BTreeMap<(&str, &str), usize> = BTreeMap::new();
    for (_, face) in mesh.boundary_faces() {
        *tags.entry((face.u_tag.as_str(), face.p_tag.as_str())).or_default() += 1;
    }
    println!(
        "{name} level {level}: {} cells, {} interior / {} boundary faces, h = {:.4}, area = {:.6}, perimeter = {:.6}, goal faces = {}",
        mesh.n_cells(),
        mesh.interior_faces().count(),
        mesh.boundary_faces().count(),
        mesh.h(),
        mesh.area(),
        mesh.perimeter(),
        mesh.goal_faces().len()
    );
    for ((u, p), n) in tags {
        println!("    u: {u:<12} p: {p:<10} {n} faces");
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let max: usize = args.first().map(|s| s.parse()).transpose()?.unwrap_or(2);
    let mut square = unit_square_mesh(4)?;
    for level in 0..=max {
        describe("unit square", level, &square);
        square = refine_uniform(&square);
    }
    for level in 0..=max {
        describe("L-shape", level, &l_shaped_mesh(level));
    }
    if let Some(path) = args.get(1) {
        l_shaped_mesh(max).write_text(BufWriter::new(File::create(path)?))?;
        println!("wrote {path}");
    }
    Ok(())
}
