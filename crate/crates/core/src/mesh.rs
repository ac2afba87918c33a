//! Structured 2D meshes of quadrilaterals or triangles on a rectangle, uniform
//! red refinement and nested mesh hierarchies.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementShape {
    Quad,
    Triangle,
}

impl ElementShape {
    pub fn n_vertices(self) -> usize {
        match self {
            ElementShape::Quad => 4,
            ElementShape::Triangle => 3,
        }
    }
}

impl std::str::FromStr for ElementShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quad" | "quads" | "cartesian" => Ok(ElementShape::Quad),
            "triangle" | "triangles" | "tri" | "triangular" => Ok(ElementShape::Triangle),
            other => Err(Error::invalid(format!("unknown element shape '{other}'"))),
        }
    }
}

impl std::fmt::Display for ElementShape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ElementShape::Quad => "quad",
            ElementShape::Triangle => "triangle",
        })
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectangle {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rectangle {
    pub const UNIT_SQUARE: Rectangle = Rectangle {
        x0: 0.0,
        y0: 0.0,
        x1: 1.0,
        y1: 1.0,
    };

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }
}

impl Default for Rectangle {
    fn default() -> Self {
        Self::UNIT_SQUARE
    }
}

/// Affine map `x = J ξ + b` from the reference element.
///
/// The reference square is `[0,1]²`, the reference triangle the unit simplex
/// with vertices (0,0), (1,0), (0,1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub jacobian: [[f64; 2]; 2],
    pub offset: [f64; 2],
}

impl AffineMap {
    /// Map whose columns are `e1 = p1 - p0` and `e2 = p2 - p0`.
    pub fn from_points(p0: [f64; 2], p1: [f64; 2], p2: [f64; 2]) -> Self {
        Self {
            jacobian: [[p1[0] - p0[0], p2[0] - p0[0]], [p1[1] - p0[1], p2[1] - p0[1]]],
            offset: p0,
        }
    }

    pub fn apply(&self, xi: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            j[0][0] * xi[0] + j[0][1] * xi[1] + self.offset[0],
            j[1][0] * xi[0] + j[1][1] * xi[1] + self.offset[1],
        ]
    }

    pub fn det(&self) -> f64 {
        let j = &self.jacobian;
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    pub fn inverse_jacobian(&self) -> [[f64; 2]; 2] {
        let j = &self.jacobian;
        let d = self.det();
        [[j[1][1] / d, -j[0][1] / d], [-j[1][0] / d, j[0][0] / d]]
    }

    pub fn inverse_apply(&self, x: [f64; 2]) -> [f64; 2] {
        let ji = self.inverse_jacobian();
        let dx = [x[0] - self.offset[0], x[1] - self.offset[1]];
        [ji[0][0] * dx[0] + ji[0][1] * dx[1], ji[1][0] * dx[0] + ji[1][1] * dx[1]]
    }

    /// Physical gradient from a reference gradient: `J^{-T} ∇̂`.
    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let ji = self.inverse_jacobian();
        [ji[0][0] * g[0] + ji[1][0] * g[1], ji[0][1] * g[0] + ji[1][1] * g[1]]
    }

    pub fn inverse(&self) -> AffineMap {
        let ji = self.inverse_jacobian();
        let o = self.offset;
        AffineMap {
            jacobian: ji,
            offset: [
                -(ji[0][0] * o[0] + ji[0][1] * o[1]),
                -(ji[1][0] * o[0] + ji[1][1] * o[1]),
            ],
        }
    }

    pub fn approx_eq(&self, other: &AffineMap, tol: f64) -> bool {
        let j = self.jacobian.iter().flatten().zip(other.jacobian.iter().flatten());
        let o = self.offset.iter().zip(&other.offset);
        j.chain(o).all(|(a, b)| (a - b).abs() <= tol)
    }

    /// `self ∘ inner`
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        let a = &self.jacobian;
        let b = &inner.jacobian;
        let mut j = [[0.0; 2]; 2];
        for (r, row) in j.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        AffineMap {
            jacobian: j,
            offset: self.apply(inner.offset),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Element {
    pub id: usize,
    /// Counterclockwise vertex ids.
    pub vertex_ids: Vec<usize>,
    pub map: AffineMap,
    pub diameter: f64,
    pub parent_id: Option<usize>,
    /// Empty, or the four children after refinement.
    pub child_ids: Vec<usize>,
}

impl Element {
    pub fn area(&self, shape: ElementShape) -> f64 {
        match shape {
            ElementShape::Quad => self.map.det(),
            ElementShape::Triangle => 0.5 * self.map.det(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceKind {
    Interior,
    Boundary,
}

#[derive(Clone, Debug)]
pub struct Face {
    pub id: usize,
    pub kind: FaceKind,
    pub element_plus: usize,
    pub element_minus: Option<usize>,
    /// Unit normal pointing out of the plus element.
    pub normal: [f64; 2],
    pub length: f64,
    /// Vertex ids, ordered counterclockwise with respect to the plus element.
    pub endpoints: [usize; 2],
}

#[derive(Clone, Debug)]
pub struct MeshLevel {
    pub shape: ElementShape,
    pub domain: Rectangle,
    pub vertices: Vec<[f64; 2]>,
    pub elements: Vec<Element>,
    pub faces: Vec<Face>,
    /// Cell spacing of the underlying structured grid.
    pub spacing: f64,
    /// Mesh size: the largest element diameter.
    pub h: f64,
}

impl MeshLevel {
    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.kind == FaceKind::Interior).count()
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.kind == FaceKind::Boundary).count()
    }

    pub fn total_area(&self) -> f64 {
        self.elements.iter().map(|e| e.area(self.shape)).sum()
    }

    /// Face ids adjacent to each element.
    pub fn element_faces(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.elements.len()];
        for f in &self.faces {
            out[f.element_plus].push(f.id);
            if let Some(m) = f.element_minus {
                out[m].push(f.id);
            }
        }
        out
    }

    pub fn min_diameter(&self) -> f64 {
        self.elements.iter().map(|e| e.diameter).fold(f64::INFINITY, f64::min)
    }

    pub fn face_point(&self, face: &Face, t: f64) -> [f64; 2] {
        let a = self.vertices[face.endpoints[0]];
        let b = self.vertices[face.endpoints[1]];
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
    }

    /// Plain-text dump for debugging.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# shape={} elements={} faces={}", self.shape, self.elements.len(), self.faces.len());
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "v {i} {} {}", v[0], v[1]);
        }
        for e in &self.elements {
            let ids: Vec<String> = e.vertex_ids.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(s, "e {} {}", e.id, ids.join(" "));
        }
        for f in &self.faces {
            let minus = f.element_minus.map_or("-".to_string(), |m| m.to_string());
            let _ = writeln!(s, "f {} {} {} {} {}", f.id, f.endpoints[0], f.endpoints[1], f.element_plus, minus);
        }
        s
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn make_element(id: usize, vertex_ids: Vec<usize>, vertices: &[[f64; 2]], parent_id: Option<usize>) -> Element {
    let p: Vec<[f64; 2]> = vertex_ids.iter().map(|&v| vertices[v]).collect();
    let (map, diameter) = if p.len() == 4 {
        (
            AffineMap::from_points(p[0], p[1], p[3]),
            dist(p[0], p[2]).max(dist(p[1], p[3])),
        )
    } else {
        (
            AffineMap::from_points(p[0], p[1], p[2]),
            dist(p[0], p[1]).max(dist(p[1], p[2])).max(dist(p[2], p[0])),
        )
    };
    Element {
        id,
        vertex_ids,
        map,
        diameter,
        parent_id,
        child_ids: Vec::new(),
    }
}

/// Derive the face list from element edges.
fn build_faces(vertices: &[[f64; 2]], elements: &[Element]) -> Vec<Face> {
    let mut faces: Vec<Face> = Vec::new();
    let mut by_edge: HashMap<(usize, usize), usize> = HashMap::new();
    for e in elements {
        let nv = e.vertex_ids.len();
        for i in 0..nv {
            let a = e.vertex_ids[i];
            let b = e.vertex_ids[(i + 1) % nv];
            let key = (a.min(b), a.max(b));
            match by_edge.get(&key) {
                Some(&fid) => {
                    let f = &mut faces[fid];
                    debug_assert!(f.element_minus.is_none(), "edge shared by more than two elements");
                    f.element_minus = Some(e.id);
                    f.kind = FaceKind::Interior;
                }
                None => {
                    let (pa, pb) = (vertices[a], vertices[b]);
                    let length = dist(pa, pb);
                    // counterclockwise traversal: outward normal is (dy, -dx)
                    let normal = [(pb[1] - pa[1]) / length, -(pb[0] - pa[0]) / length];
                    let id = faces.len();
                    by_edge.insert(key, id);
                    faces.push(Face {
                        id,
                        kind: FaceKind::Boundary,
                        element_plus: e.id,
                        element_minus: None,
                        normal,
                        length,
                        endpoints: [a, b],
                    });
                }
            }
        }
    }
    faces
}

/// Structured mesh of `n_cells_per_side²` cells on `domain`. Triangle meshes
/// split each cell along its bottom-left to top-right diagonal.
pub fn build_initial_mesh(domain: Rectangle, n_cells_per_side: usize, shape: ElementShape) -> Result<MeshLevel> {
    if n_cells_per_side == 0 {
        return Err(Error::invalid("cell count per side must be at least 1"));
    }
    if !(domain.x1 > domain.x0 && domain.y1 > domain.y0) {
        return Err(Error::invalid("degenerate domain"));
    }
    let n = n_cells_per_side;
    let dx = (domain.x1 - domain.x0) / n as f64;
    let dy = (domain.y1 - domain.y0) / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([domain.x0 + i as f64 * dx, domain.y0 + j as f64 * dy]);
        }
    }
    let vid = |i: usize, j: usize| j * (n + 1) + i;
    let mut elements = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            match shape {
                ElementShape::Quad => {
                    elements.push(make_element(elements.len(), vec![a, b, c, d], &vertices, None));
                }
                ElementShape::Triangle => {
                    elements.push(make_element(elements.len(), vec![a, b, c], &vertices, None));
                    elements.push(make_element(elements.len(), vec![a, c, d], &vertices, None));
                }
            }
        }
    }
    Ok(finish_level(shape, domain, vertices, elements, dx.max(dy)))
}

fn finish_level(
    shape: ElementShape,
    domain: Rectangle,
    vertices: Vec<[f64; 2]>,
    elements: Vec<Element>,
    spacing: f64,
) -> MeshLevel {
    let faces = build_faces(&vertices, &elements);
    let h = elements.iter().map(|e| e.diameter).fold(0.0, f64::max);
    MeshLevel {
        shape,
        domain,
        vertices,
        elements,
        faces,
        spacing,
        h,
    }
}

/// Red refinement: every element is split into four congruent children by
/// connecting edge midpoints. Child `c` of element `e` gets id `4e + c`.
pub fn refine_uniform(level: &MeshLevel) -> Result<MeshLevel> {
    let mut vertices = level.vertices.clone();
    let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
    let mut mid = |a: usize, b: usize, vertices: &mut Vec<[f64; 2]>| -> usize {
        let key = (a.min(b), a.max(b));
        *midpoint.entry(key).or_insert_with(|| {
            let (pa, pb) = (vertices[a], vertices[b]);
            vertices.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            vertices.len() - 1
        })
    };
    let mut elements = Vec::with_capacity(4 * level.elements.len());
    for e in &level.elements {
        let v = &e.vertex_ids;
        if v.len() != level.shape.n_vertices() {
            return Err(Error::invalid("element vertex count does not match mesh shape"));
        }
        let children: Vec<Vec<usize>> = match level.shape {
            ElementShape::Quad => {
                let (a, b, c, d) = (v[0], v[1], v[2], v[3]);
                let mab = mid(a, b, &mut vertices);
                let mbc = mid(b, c, &mut vertices);
                let mcd = mid(c, d, &mut vertices);
                let mda = mid(d, a, &mut vertices);
                let pa = vertices[a];
                let pc = vertices[c];
                vertices.push([0.5 * (pa[0] + pc[0]), 0.5 * (pa[1] + pc[1])]);
                let center = vertices.len() - 1;
                vec![
                    vec![a, mab, center, mda],
                    vec![mab, b, mbc, center],
                    vec![center, mbc, c, mcd],
                    vec![mda, center, mcd, d],
                ]
            }
            ElementShape::Triangle => {
                let (a, b, c) = (v[0], v[1], v[2]);
                let mab = mid(a, b, &mut vertices);
                let mbc = mid(b, c, &mut vertices);
                let mca = mid(c, a, &mut vertices);
                vec![
                    vec![a, mab, mca],
                    vec![mab, b, mbc],
                    vec![mca, mbc, c],
                    vec![mbc, mca, mab],
                ]
            }
        };
        for child in children {
            elements.push(make_element(elements.len(), child, &vertices, Some(e.id)));
        }
    }
    Ok(finish_level(level.shape, level.domain, vertices, elements, 0.5 * level.spacing))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HierarchyStep {
    /// Refine the mesh, keep the degree.
    H,
    /// Keep the mesh, raise the degree.
    P,
    /// Both.
    HP,
}

impl std::str::FromStr for HierarchyStep {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "h" => Ok(HierarchyStep::H),
            "p" => Ok(HierarchyStep::P),
            "hp" => Ok(HierarchyStep::HP),
            other => Err(Error::invalid(format!("unknown hierarchy step '{other}'"))),
        }
    }
}

/// Nested meshes, coarsest first. Levels produced by a `P` step share the
/// mesh of the previous level.
#[derive(Clone, Debug)]
pub struct MeshHierarchy {
    pub levels: Vec<Arc<MeshLevel>>,
    pub domain: Rectangle,
}

impl MeshHierarchy {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    /// CSV summary: one row per level.
    pub fn summary_csv(&self, degrees: &[usize]) -> String {
        let mut s = String::from("level,elements,interior_faces,boundary_faces,h,spacing,degree\n");
        for (k, m) in self.levels.iter().enumerate() {
            let p = degrees.get(k).map_or(String::new(), |p| p.to_string());
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                k + 1,
                m.n_elements(),
                m.n_interior_faces(),
                m.n_boundary_faces(),
                m.h,
                m.spacing,
                p
            );
        }
        s
    }
}

/// Build a hierarchy from `initial` by applying `steps` in order, starting at
/// degree `p1` and adding `p_increment` for every `P`/`HP` step.
pub fn build_hierarchy(
    initial: MeshLevel,
    steps: &[HierarchyStep],
    p1: usize,
    p_increment: i64,
) -> Result<(MeshHierarchy, Vec<usize>)> {
    if p1 < 1 {
        return Err(Error::invalid("coarsest degree must be at least 1"));
    }
    if p_increment < 0 {
        return Err(Error::invalid("degree increment must be non-negative"));
    }
    let domain = initial.domain;
    let mut levels = vec![Arc::new(initial)];
    let mut degrees = vec![p1];
    for step in steps {
        let prev = levels.last().expect("at least one level").clone();
        let p_prev = *degrees.last().expect("at least one degree");
        let (mesh, p) = match step {
            HierarchyStep::H => (Arc::new(refine_uniform(&prev)?), p_prev),
            HierarchyStep::P => (prev.clone(), p_prev + p_increment as usize),
            HierarchyStep::HP => (Arc::new(refine_uniform(&prev)?), p_prev + p_increment as usize),
        };
        if !Arc::ptr_eq(&mesh, &prev) {
            // record child links on the coarser mesh
            let mut coarse = (*prev).clone();
            for e in &mut coarse.elements {
                e.child_ids = (4 * e.id..4 * e.id + 4).collect();
            }
            let coarse = Arc::new(coarse);
            // keep earlier P-step levels pointing at the same mesh object
            for lvl in levels.iter_mut() {
                if Arc::ptr_eq(lvl, &prev) {
                    *lvl = coarse.clone();
                }
            }
        }
        levels.push(mesh);
        degrees.push(p);
    }
    Ok((MeshHierarchy { levels, domain }, degrees))
}
