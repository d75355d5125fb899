//! Conforming meshes of axis-aligned rectangles with face connectivity and
//! boundary tagging.
//!
//! Cells store their vertices counterclockwise starting at the lower-left
//! corner, so every element map is `x = origin + size * (1 + xi) / 2` with a
//! diagonal, constant Jacobian.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};

/// Boundary condition family for the displacement/velocity on a face.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DisplacementTag {
    Interior,
    /// Dirichlet data imposed weakly (Nitsche).
    Dirichlet,
    /// Traction boundary.
    Neumann,
    /// Roller: zero normal displacement, zero tangential traction.
    Directional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PressureTag {
    Interior,
    Dirichlet,
    Neumann,
}

impl DisplacementTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DisplacementTag::Interior => "interior",
            DisplacementTag::Dirichlet => "u_dirichlet",
            DisplacementTag::Neumann => "u_neumann",
            DisplacementTag::Directional => "u_directional",
        }
    }
}

impl PressureTag {
    pub fn as_str(self) -> &'static str {
        match self {
            PressureTag::Interior => "interior",
            PressureTag::Dirichlet => "p_dirichlet",
            PressureTag::Neumann => "p_neumann",
        }
    }
}

/// Tags assigned to a boundary face.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceTags {
    pub u: DisplacementTag,
    pub p: PressureTag,
    pub goal: bool,
}

impl FaceTags {
    pub const INTERIOR: FaceTags = FaceTags {
        u: DisplacementTag::Interior,
        p: PressureTag::Interior,
        goal: false,
    };

    pub fn boundary(u: DisplacementTag, p: PressureTag) -> Self {
        Self { u, p, goal: false }
    }
}

/// Local face of a reference cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LocalFace {
    Bottom = 0,
    Right = 1,
    Top = 2,
    Left = 3,
}

impl LocalFace {
    pub const ALL: [LocalFace; 4] = [
        LocalFace::Bottom,
        LocalFace::Right,
        LocalFace::Top,
        LocalFace::Left,
    ];

    /// Outward unit normal.
    pub fn normal(self) -> [f64; 2] {
        match self {
            LocalFace::Bottom => [0.0, -1.0],
            LocalFace::Right => [1.0, 0.0],
            LocalFace::Top => [0.0, 1.0],
            LocalFace::Left => [-1.0, 0.0],
        }
    }

    /// Local vertex indices in counterclockwise order.
    fn local_vertices(self) -> [usize; 2] {
        match self {
            LocalFace::Bottom => [0, 1],
            LocalFace::Right => [1, 2],
            LocalFace::Top => [2, 3],
            LocalFace::Left => [3, 0],
        }
    }

    /// Reference point on the face for face parameter `s` in `[-1, 1]`,
    /// increasing along the positive coordinate direction.
    pub fn reference_point(self, s: f64) -> [f64; 2] {
        match self {
            LocalFace::Bottom => [s, -1.0],
            LocalFace::Right => [1.0, s],
            LocalFace::Top => [s, 1.0],
            LocalFace::Left => [-1.0, s],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Face {
    pub vertices: [usize; 2],
    /// Owning cell `K+` and its local face.
    pub owner: (usize, LocalFace),
    /// Neighbor `K-`, `None` on the boundary.
    pub neighbor: Option<(usize, LocalFace)>,
    /// Unit normal pointing from the owner to the neighbor (outward on the
    /// boundary).
    pub normal: [f64; 2],
    pub measure: f64,
    /// Penalty length scale `h_F = |K| / (2 |F|)`, averaged over both cells
    /// on interior faces; half the cell width normal to the face on a
    /// rectangular mesh.
    pub h_f: f64,
    pub u_tag: DisplacementTag,
    pub p_tag: PressureTag,
    pub is_goal_segment: bool,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }
}

/// Physical placement of a rectangular cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    pub origin: [f64; 2],
    pub size: [f64; 2],
}

impl CellGeometry {
    pub fn map(&self, xi: [f64; 2]) -> [f64; 2] {
        [
            self.origin[0] + 0.5 * self.size[0] * (1.0 + xi[0]),
            self.origin[1] + 0.5 * self.size[1] * (1.0 + xi[1]),
        ]
    }

    pub fn area(&self) -> f64 {
        self.size[0] * self.size[1]
    }

    /// Jacobian determinant of the reference map.
    pub fn det_jacobian(&self) -> f64 {
        0.25 * self.area()
    }

    /// Diagonal of the inverse Jacobian (reference derivatives to physical).
    pub fn inverse_jacobian(&self) -> [f64; 2] {
        [2.0 / self.size[0], 2.0 / self.size[1]]
    }

    pub fn face_length(&self, face: LocalFace) -> f64 {
        match face {
            LocalFace::Bottom | LocalFace::Top => self.size[0],
            LocalFace::Left | LocalFace::Right => self.size[1],
        }
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 4]>,
    pub faces: Vec<Face>,
    /// Face index of each local face (bottom, right, top, left) per cell.
    pub cell_faces: Vec<[usize; 4]>,
    pub refinement_level: usize,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Mesh {
    /// Builds faces and tags from cells. `tag` receives the sorted vertex
    /// pair, midpoint and outward normal of every boundary face.
    fn build(
        vertices: Vec<[f64; 2]>,
        cells: Vec<[usize; 4]>,
        refinement_level: usize,
        mut tag: impl FnMut((usize, usize), [f64; 2], [f64; 2]) -> FaceTags,
    ) -> Result<Self> {
        let mut faces: Vec<Face> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_faces = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let p0 = vertices[cell[0]];
            let p2 = vertices[cell[2]];
            let (hx, hy) = (p2[0] - p0[0], p2[1] - p0[1]);
            let rectangular = hx > 0.0
                && hy > 0.0
                && vertices[cell[1]] == [p2[0], p0[1]]
                && vertices[cell[3]] == [p0[0], p2[1]];
            if !rectangular {
                return Err(Error::invalid(format!(
                    "cell {c} is not a counterclockwise axis-aligned rectangle"
                )));
            }
            let area = hx * hy;
            let mut local = [0usize; 4];
            for lf in LocalFace::ALL {
                let [a, b] = lf.local_vertices().map(|i| cell[i]);
                let key = edge_key(a, b);
                match lookup.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.neighbor.is_some() {
                            return Err(Error::invalid(format!(
                                "edge {key:?} shared by more than two cells"
                            )));
                        }
                        face.neighbor = Some((c, lf));
                        // the owner stored its own |K| / (2 |F|)
                        face.h_f = 0.5 * (face.h_f + 0.5 * area / face.measure);
                        local[lf as usize] = f;
                    }
                    None => {
                        let (pa, pb) = (vertices[a], vertices[b]);
                        let measure = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
                        lookup.insert(key, faces.len());
                        local[lf as usize] = faces.len();
                        faces.push(Face {
                            vertices: [key.0, key.1],
                            owner: (c, lf),
                            neighbor: None,
                            normal: lf.normal(),
                            measure,
                            h_f: 0.5 * area / measure,
                            u_tag: DisplacementTag::Interior,
                            p_tag: PressureTag::Interior,
                            is_goal_segment: false,
                        });
                    }
                }
            }
            cell_faces.push(local);
        }
        for face in faces.iter_mut().filter(|f| f.neighbor.is_none()) {
            let (pa, pb) = (vertices[face.vertices[0]], vertices[face.vertices[1]]);
            let mid = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
            let tags = tag((face.vertices[0], face.vertices[1]), mid, face.normal);
            if tags.u == DisplacementTag::Interior || tags.p == PressureTag::Interior {
                return Err(Error::invalid(format!(
                    "boundary face at {mid:?} received an interior tag"
                )));
            }
            face.u_tag = tags.u;
            face.p_tag = tags.p;
            face.is_goal_segment = tags.goal;
        }
        Ok(Mesh {
            vertices,
            cells,
            faces,
            cell_faces,
            refinement_level,
        })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell_geometry(&self, cell: usize) -> CellGeometry {
        let c = &self.cells[cell];
        let p0 = self.vertices[c[0]];
        let p2 = self.vertices[c[2]];
        CellGeometry {
            origin: p0,
            size: [p2[0] - p0[0], p2[1] - p0[1]],
        }
    }

    /// Mesh size: the largest cell diagonal.
    pub fn h(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| {
                let g = self.cell_geometry(c);
                g.size[0].hypot(g.size[1])
            })
            .fold(0.0, f64::max)
    }

    pub fn area(&self) -> f64 {
        (0..self.n_cells())
            .map(|c| self.cell_geometry(c).area())
            .sum()
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.is_boundary())
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = (usize, &Face)> {
        self.faces
            .iter()
            .enumerate()
            .filter(|(_, f)| !f.is_boundary())
    }

    pub fn perimeter(&self) -> f64 {
        self.boundary_faces().map(|(_, f)| f.measure).sum()
    }

    pub fn faces_with_u_tag(&self, tag: DisplacementTag) -> Vec<usize> {
        self.boundary_faces()
            .filter(|(_, f)| f.u_tag == tag)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn goal_faces(&self) -> Vec<usize> {
        self.boundary_faces()
            .filter(|(_, f)| f.is_goal_segment)
            .map(|(i, _)| i)
            .collect()
    }

    /// Writes the mesh as plain text: `v x y`, `c i0 i1 i2 i3`, and
    /// `f i0 i1 tag_u tag_p` for every boundary face.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {:.17e} {:.17e}", v[0], v[1])?;
        }
        for c in &self.cells {
            writeln!(w, "c {} {} {} {}", c[0], c[1], c[2], c[3])?;
        }
        for (_, f) in self.boundary_faces() {
            writeln!(
                w,
                "f {} {} {} {}",
                f.vertices[0],
                f.vertices[1],
                f.u_tag.as_str(),
                f.p_tag.as_str()
            )?;
        }
        Ok(())
    }
}

/// Structured grid over `[x0, x0 + nx*dx] x [y0, y0 + ny*dy]` keeping the
/// cells whose center satisfies `keep`.
fn grid_cells(
    origin: [f64; 2],
    n: [usize; 2],
    d: [f64; 2],
    keep: impl Fn([f64; 2]) -> bool,
) -> (Vec<[f64; 2]>, Vec<[usize; 4]>) {
    let vid = |i: usize, j: usize| j * (n[0] + 1) + i;
    let mut used = vec![false; (n[0] + 1) * (n[1] + 1)];
    let mut raw_cells = Vec::new();
    for j in 0..n[1] {
        for i in 0..n[0] {
            let center = [
                origin[0] + (i as f64 + 0.5) * d[0],
                origin[1] + (j as f64 + 0.5) * d[1],
            ];
            if keep(center) {
                let c = [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)];
                for v in c {
                    used[v] = true;
                }
                raw_cells.push(c);
            }
        }
    }
    let mut renumber = vec![usize::MAX; used.len()];
    let mut vertices = Vec::new();
    for j in 0..=n[1] {
        for i in 0..=n[0] {
            if used[vid(i, j)] {
                renumber[vid(i, j)] = vertices.len();
                vertices.push([origin[0] + i as f64 * d[0], origin[1] + j as f64 * d[1]]);
            }
        }
    }
    let cells = raw_cells
        .into_iter()
        .map(|c| c.map(|v| renumber[v]))
        .collect();
    (vertices, cells)
}

/// Uniform `n x n` mesh of the unit square with Dirichlet conditions for
/// both fields on the whole boundary.
pub fn unit_square_mesh(n: usize) -> Result<Mesh> {
    unit_square_mesh_with(n, |_, _| {
        FaceTags::boundary(DisplacementTag::Dirichlet, PressureTag::Dirichlet)
    })
}

/// Uniform `n x n` mesh of the unit square; `tag` maps a boundary face
/// (midpoint, outward normal) to its tags.
pub fn unit_square_mesh_with(
    n: usize,
    tag: impl Fn([f64; 2], [f64; 2]) -> FaceTags,
) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::invalid("unit_square_mesh needs at least one cell per side"));
    }
    let d = 1.0 / n as f64;
    let (vertices, cells) = grid_cells([0.0, 0.0], [n, n], [d, d], |_| true);
    Mesh::build(vertices, cells, 0, |_, mid, normal| tag(mid, normal))
}

/// Splits every cell into four congruent children; boundary tags are
/// inherited from the parent faces.
pub fn refine_uniform(mesh: &Mesh) -> Mesh {
    let nv = mesh.vertices.len();
    let nf = mesh.faces.len();
    let mut vertices = mesh.vertices.clone();
    for f in &mesh.faces {
        let (a, b) = (mesh.vertices[f.vertices[0]], mesh.vertices[f.vertices[1]]);
        vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
    }
    for c in &mesh.cells {
        let (a, b) = (mesh.vertices[c[0]], mesh.vertices[c[2]]);
        vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
    }
    let mut inherited: HashMap<(usize, usize), FaceTags> = HashMap::new();
    for (i, f) in mesh.boundary_faces() {
        let tags = FaceTags {
            u: f.u_tag,
            p: f.p_tag,
            goal: f.is_goal_segment,
        };
        let m = nv + i;
        inherited.insert(edge_key(f.vertices[0], m), tags);
        inherited.insert(edge_key(m, f.vertices[1]), tags);
    }
    let mut cells = Vec::with_capacity(4 * mesh.n_cells());
    for (c, cell) in mesh.cells.iter().enumerate() {
        let [fb, fr, ft, fl] = mesh.cell_faces[c].map(|f| nv + f);
        let center = nv + nf + c;
        let [v0, v1, v2, v3] = *cell;
        cells.push([v0, fb, center, fl]);
        cells.push([fb, v1, fr, center]);
        cells.push([center, fr, v2, ft]);
        cells.push([fl, center, ft, v3]);
    }
    Mesh::build(vertices, cells, mesh.refinement_level + 1, |key, _, _| {
        inherited[&key]
    })
    .expect("refinement of a valid mesh is valid")
}

/// Sides of the L-shaped benchmark domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LShapeSide {
    /// `y = 0`
    Bottom,
    /// `x = 0`
    Left,
    /// `y = 1`
    Top,
    /// outer right boundary `x = 1`
    Right,
    /// notch face `x = notch_x`, the measurement segment
    NotchVertical,
    /// notch face `y = notch_y`
    NotchHorizontal,
}

impl LShapeSide {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.trim() {
            "bottom" => LShapeSide::Bottom,
            "left" => LShapeSide::Left,
            "top" => LShapeSide::Top,
            "right" => LShapeSide::Right,
            "notch_vertical" => LShapeSide::NotchVertical,
            "notch_horizontal" => LShapeSide::NotchHorizontal,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LShapeSide::Bottom => "bottom",
            LShapeSide::Left => "left",
            LShapeSide::Top => "top",
            LShapeSide::Right => "right",
            LShapeSide::NotchVertical => "notch_vertical",
            LShapeSide::NotchHorizontal => "notch_horizontal",
        }
    }
}

/// Geometry and boundary layout of the benchmark domain
/// `(0,1)^2 \ [notch_x, 1] x [0, notch_y]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LShapeConfig {
    pub notch_x: f64,
    pub notch_y: f64,
    /// Edge length of the level-0 cells; the notch corner must lie on this grid.
    pub coarse_size: f64,
    /// Sides carrying roller conditions; all other sides are traction sides.
    pub rollers: Vec<LShapeSide>,
    /// `x` range on the top boundary with pressure Dirichlet conditions.
    pub pressure_dirichlet: (f64, f64),
}

impl Default for LShapeConfig {
    fn default() -> Self {
        Self {
            notch_x: 0.75,
            notch_y: 0.5,
            coarse_size: 0.25,
            rollers: vec![LShapeSide::Bottom, LShapeSide::Left],
            pressure_dirichlet: (0.0, 0.5),
        }
    }
}

impl LShapeConfig {
    pub fn area(&self) -> f64 {
        1.0 - (1.0 - self.notch_x) * self.notch_y
    }

    pub fn classify(&self, mid: [f64; 2], normal: [f64; 2]) -> LShapeSide {
        const EPS: f64 = 1e-12;
        match normal {
            [x, _] if x < -0.5 => LShapeSide::Left,
            [_, y] if y > 0.5 => LShapeSide::Top,
            [x, _] if x > 0.5 => {
                if (mid[0] - 1.0).abs() < EPS {
                    LShapeSide::Right
                } else {
                    LShapeSide::NotchVertical
                }
            }
            _ => {
                if mid[1].abs() < EPS {
                    LShapeSide::Bottom
                } else {
                    LShapeSide::NotchHorizontal
                }
            }
        }
    }

    pub fn tags(&self, mid: [f64; 2], normal: [f64; 2]) -> FaceTags {
        let side = self.classify(mid, normal);
        let u = if self.rollers.contains(&side) {
            DisplacementTag::Directional
        } else {
            DisplacementTag::Neumann
        };
        let (a, b) = self.pressure_dirichlet;
        let p = if side == LShapeSide::Top && mid[0] >= a && mid[0] <= b {
            PressureTag::Dirichlet
        } else {
            PressureTag::Neumann
        };
        FaceTags {
            u,
            p,
            goal: side == LShapeSide::NotchVertical,
        }
    }
}

/// Benchmark L-shaped mesh with the default layout, refined `level` times.
pub fn l_shaped_mesh(level: usize) -> Mesh {
    l_shaped_mesh_with(level, &LShapeConfig::default()).expect("default layout is valid")
}

pub fn l_shaped_mesh_with(level: usize, cfg: &LShapeConfig) -> Result<Mesh> {
    let n = (1.0 / cfg.coarse_size).round() as usize;
    let aligned = |v: f64| {
        let k = v / cfg.coarse_size;
        (k - k.round()).abs() < 1e-12 && v > 0.0 && v < 1.0
    };
    if n == 0 || (n as f64 * cfg.coarse_size - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("coarse cell size must divide the unit interval"));
    }
    if !aligned(cfg.notch_x) || !aligned(cfg.notch_y) {
        return Err(Error::invalid("notch corner must lie on the coarse grid"));
    }
    let d = cfg.coarse_size;
    let (vertices, cells) = grid_cells([0.0, 0.0], [n, n], [d, d], |c| {
        !(c[0] > cfg.notch_x && c[1] < cfg.notch_y)
    });
    let mut mesh = Mesh::build(vertices, cells, 0, |_, mid, normal| cfg.tags(mid, normal))?;
    for _ in 0..level {
        mesh = refine_uniform(&mesh);
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(mesh: &Mesh, area: f64, perimeter: f64) {
        assert!((mesh.area() - area).abs() < 1e-12 * area);
        assert!((mesh.perimeter() - perimeter).abs() < 1e-12 * perimeter);
        let mut count = vec![0usize; mesh.faces.len()];
        for cf in &mesh.cell_faces {
            for &f in cf {
                count[f] += 1;
            }
        }
        for (f, face) in mesh.faces.iter().enumerate() {
            let n = face.normal;
            assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() < 1e-14);
            match face.neighbor {
                Some((k, lf)) => {
                    assert_eq!(count[f], 2);
                    let out = lf.normal();
                    assert_eq!([-out[0], -out[1]], n);
                    let a0 = mesh.cell_geometry(face.owner.0).area();
                    let a1 = mesh.cell_geometry(k).area();
                    let expect = 0.25 * (a0 + a1) / face.measure;
                    assert!((face.h_f - expect).abs() < 1e-15);
                    assert_eq!(face.u_tag, DisplacementTag::Interior);
                    assert_eq!(face.p_tag, PressureTag::Interior);
                }
                None => {
                    assert_eq!(count[f], 1);
                    let expect = 0.5 * mesh.cell_geometry(face.owner.0).area() / face.measure;
                    assert!((face.h_f - expect).abs() < 1e-15);
                    assert_ne!(face.u_tag, DisplacementTag::Interior);
                    assert_ne!(face.p_tag, PressureTag::Interior);
                }
            }
        }
    }

    #[test]
    fn unit_square_counts() {
        let m = unit_square_mesh(4).unwrap();
        assert_eq!(m.n_cells(), 16);
        assert_eq!(m.vertices.len(), 25);
        assert!((m.h() - 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        check_invariants(&m, 1.0, 4.0);

        let m = unit_square_mesh(1).unwrap();
        assert_eq!(m.boundary_faces().count(), 4);
        assert_eq!(m.interior_faces().count(), 0);

        let m = unit_square_mesh(2).unwrap();
        assert_eq!(m.n_cells(), 4);
        assert_eq!(m.interior_faces().count(), 4);
        assert_eq!(m.boundary_faces().count(), 8);
        check_invariants(&m, 1.0, 4.0);

        assert!(unit_square_mesh(0).is_err());
    }

    #[test]
    fn refinement() {
        let m = unit_square_mesh(4).unwrap();
        let r = refine_uniform(&m);
        assert_eq!(r.n_cells(), 64);
        assert!((r.h() - m.h() / 2.0).abs() < 1e-14);
        check_invariants(&r, 1.0, 4.0);
        assert!(r
            .boundary_faces()
            .all(|(_, f)| f.u_tag == DisplacementTag::Dirichlet));

        let twice = refine_uniform(&r);
        let direct = unit_square_mesh(16).unwrap();
        let key = |v: &[f64; 2]| ((v[0] * 1e9).round() as i64, (v[1] * 1e9).round() as i64);
        let mut a: Vec<_> = twice.vertices.iter().map(key).collect();
        let mut b: Vec<_> = direct.vertices.iter().map(key).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }

    #[test]
    fn l_shape_layout() {
        let m0 = l_shaped_mesh(0);
        assert_eq!(m0.n_cells(), 14);
        check_invariants(&m0, 0.875, 4.0);
        for level in 0..4 {
            let m = l_shaped_mesh(level);
            assert_eq!(m.n_cells(), 14 * 4usize.pow(level as u32));
            check_invariants(&m, 0.875, 4.0);
            let goal: Vec<_> = m.goal_faces();
            assert!(!goal.is_empty());
            let len: f64 = goal.iter().map(|&f| m.faces[f].measure).sum();
            assert!((len - 0.5).abs() < 1e-14);
            for &f in &goal {
                let face = &m.faces[f];
                let (a, b) = (m.vertices[face.vertices[0]], m.vertices[face.vertices[1]]);
                assert_eq!(a[0], 0.75);
                assert_eq!(b[0], 0.75);
                assert_eq!(face.normal, [1.0, 0.0]);
            }
            let pd: f64 = m
                .boundary_faces()
                .filter(|(_, f)| f.p_tag == PressureTag::Dirichlet)
                .map(|(_, f)| f.measure)
                .sum();
            assert!((pd - 0.5).abs() < 1e-14);
            let rollers: f64 = m
                .boundary_faces()
                .filter(|(_, f)| f.u_tag == DisplacementTag::Directional)
                .map(|(_, f)| f.measure)
                .sum();
            assert!((rollers - 1.75).abs() < 1e-14);
        }
    }

    #[test]
    fn l_shape_rejects_misaligned_notch() {
        let cfg = LShapeConfig {
            notch_x: 0.7,
            ..LShapeConfig::default()
        };
        assert!(l_shaped_mesh_with(0, &cfg).is_err());
    }

    #[test]
    fn text_dump() {
        let m = unit_square_mesh(1).unwrap();
        let mut buf = Vec::new();
        m.write_text(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(text.lines().filter(|l| l.starts_with("c ")).count(), 1);
        let faces: Vec<_> = text.lines().filter(|l| l.starts_with("f ")).collect();
        assert_eq!(faces.len(), 4);
        assert!(faces[0].ends_with("u_dirichlet p_dirichlet"));
    }
}
