//! Indexed triangle meshes: representation, adjacency, normals and the
//! watertightness / volume oracles every other module leans on.
//!
//! Positions are millimeters. Meshes are plain values; all operations here
//! are pure functions over `&TriangleMesh`.

mod io;
mod topology;

pub use io::{load_mesh, save_mesh, save_mesh_with_normals, MeshFormat};
pub use topology::Topology;

use nalgebra::{Point3, Vector3};
use std::collections::HashSet;
use std::f64::consts::PI;
use thiserror::Error;

pub type Point = Point3<f64>;
pub type Vector = Vector3<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error("mesh has no faces")]
    Empty,
    #[error("face {face} references vertex {index} but the mesh has {count} vertices")]
    IndexOutOfRange { face: usize, index: u32, count: usize },
    #[error("face {face} repeats vertex {vertex}")]
    RepeatedVertex { face: usize, vertex: u32 },
    #[error("faces {first} and {second} are identical")]
    DuplicateFace { first: usize, second: usize },
    #[error("vertex {vertex} has no incident faces; its normal is undefined")]
    IsolatedVertex { vertex: usize },
    #[error("face {face} is degenerate (zero area)")]
    DegenerateFace { face: usize },
    #[error("mesh is not watertight ({0})")]
    NotWatertight(WatertightReport),
}

/// Indexed triangle surface.
///
/// Invariants (enforced by [`TriangleMesh::new`]): every index is in range,
/// no face repeats a vertex, and no two faces are identical up to rotation.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point>,
    faces: Vec<[u32; 3]>,
    normals: Option<Vec<Vector>>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point>, faces: Vec<[u32; 3]>) -> Result<Self, MeshError> {
        let mesh = TriangleMesh {
            vertices,
            faces,
            normals: None,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    /// An empty mesh. Only useful as a placeholder; most operations reject it.
    pub fn empty() -> Self {
        TriangleMesh {
            vertices: Vec::new(),
            faces: Vec::new(),
            normals: None,
        }
    }

    pub(crate) fn from_parts_unchecked(vertices: Vec<Point>, faces: Vec<[u32; 3]>) -> Self {
        TriangleMesh {
            vertices,
            faces,
            normals: None,
        }
    }

    fn validate(&self) -> Result<(), MeshError> {
        let n = self.vertices.len();
        let mut seen: HashSet<[u32; 3]> = HashSet::with_capacity(self.faces.len());
        let mut first_of: std::collections::HashMap<[u32; 3], usize> = Default::default();
        for (fi, f) in self.faces.iter().enumerate() {
            for &v in f {
                if v as usize >= n {
                    return Err(MeshError::IndexOutOfRange {
                        face: fi,
                        index: v,
                        count: n,
                    });
                }
            }
            if f[0] == f[1] || f[0] == f[2] {
                return Err(MeshError::RepeatedVertex { face: fi, vertex: f[0] });
            }
            if f[1] == f[2] {
                return Err(MeshError::RepeatedVertex { face: fi, vertex: f[1] });
            }
            let key = canonical_rotation(*f);
            if !seen.insert(key) {
                return Err(MeshError::DuplicateFace {
                    first: first_of[&key],
                    second: fi,
                });
            }
            first_of.insert(key, fi);
        }
        Ok(())
    }

    /// Attaches per-vertex unit normals (emitted by OBJ export on request).
    pub fn with_normals(mut self, normals: Vec<Vector>) -> Self {
        assert_eq!(normals.len(), self.vertices.len());
        self.normals = Some(normals);
        self
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn normals(&self) -> Option<&[Vector]> {
        self.normals.as_deref()
    }

    pub fn vertex(&self, i: usize) -> Point {
        self.vertices[i]
    }

    pub fn face(&self, i: usize) -> [u32; 3] {
        self.faces[i]
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face_points(&self, f: usize) -> [Point; 3] {
        let [a, b, c] = self.faces[f];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Non-normalized face normal (twice the area vector).
    pub fn face_cross(&self, f: usize) -> Vector {
        let [a, b, c] = self.face_points(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_normal(&self, f: usize) -> Option<Vector> {
        let n = self.face_cross(f);
        let len = n.norm();
        (len > 0.0 && len.is_finite()).then(|| n / len)
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn face_centroid(&self, f: usize) -> Point {
        let [a, b, c] = self.face_points(f);
        Point::from((a.coords + b.coords + c.coords) / 3.0)
    }

    /// Interior angle of face `f` at its corner `corner` (0, 1 or 2).
    pub fn corner_angle(&self, f: usize, corner: usize) -> f64 {
        let face = self.faces[f];
        let p = self.vertices[face[corner] as usize];
        let q = self.vertices[face[(corner + 1) % 3] as usize];
        let r = self.vertices[face[(corner + 2) % 3] as usize];
        angle_between(&(q - p), &(r - p))
    }

    /// Axis-aligned bounding box `(min, max)`. Panics on a mesh with no vertices.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = self.vertices[0];
        let mut hi = self.vertices[0];
        for p in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    pub fn bounding_diagonal(&self) -> f64 {
        if self.vertices.is_empty() {
            return 0.0;
        }
        let (lo, hi) = self.bounding_box();
        (hi - lo).norm()
    }

    pub fn topology(&self) -> Topology {
        Topology::build(self)
    }

    /// Euler characteristic V − E + F over referenced vertices.
    pub fn euler_characteristic(&self) -> i64 {
        let topo = self.topology();
        let used = topo.vertex_faces().iter().filter(|f| !f.is_empty()).count() as i64;
        used - topo.num_edges() as i64 + self.faces.len() as i64
    }

    /// Same mesh with every face reversed.
    pub fn flipped(&self) -> TriangleMesh {
        let faces = self.faces.iter().map(|&[a, b, c]| [a, c, b]).collect();
        TriangleMesh {
            vertices: self.vertices.clone(),
            faces,
            normals: self
                .normals
                .as_ref()
                .map(|ns| ns.iter().map(|n| -n).collect()),
        }
    }

    /// Drops vertices no face references, preserving relative order.
    pub fn compacted(&self) -> TriangleMesh {
        let mut remap = vec![u32::MAX; self.vertices.len()];
        for f in &self.faces {
            for &v in f {
                remap[v as usize] = 0;
            }
        }
        let mut vertices = Vec::new();
        let mut normals = self.normals.as_ref().map(|_| Vec::new());
        for (i, slot) in remap.iter_mut().enumerate() {
            if *slot == 0 {
                *slot = vertices.len() as u32;
                vertices.push(self.vertices[i]);
                if let (Some(out), Some(src)) = (normals.as_mut(), self.normals.as_ref()) {
                    out.push(src[i]);
                }
            }
        }
        let faces = self
            .faces
            .iter()
            .map(|f| f.map(|v| remap[v as usize]))
            .collect();
        TriangleMesh {
            vertices,
            faces,
            normals,
        }
    }
}

fn canonical_rotation(f: [u32; 3]) -> [u32; 3] {
    let m = if f[0] <= f[1] && f[0] <= f[2] {
        0
    } else if f[1] <= f[2] {
        1
    } else {
        2
    };
    [f[m], f[(m + 1) % 3], f[(m + 2) % 3]]
}

/// Unsigned angle between two vectors, robust for nearly parallel inputs.
pub fn angle_between(u: &Vector, v: &Vector) -> f64 {
    u.cross(v).norm().atan2(u.dot(v))
}

/// Angle-weighted vertex normals.
pub fn vertex_normals(mesh: &TriangleMesh) -> Result<Vec<Vector>, MeshError> {
    let mut acc = vec![Vector::zeros(); mesh.num_vertices()];
    let mut touched = vec![false; mesh.num_vertices()];
    for f in 0..mesh.num_faces() {
        let face = mesh.face(f);
        let n = mesh.face_normal(f).ok_or(MeshError::DegenerateFace { face: f })?;
        for corner in 0..3 {
            let v = face[corner] as usize;
            acc[v] += n * mesh.corner_angle(f, corner);
            touched[v] = true;
        }
    }
    acc.into_iter()
        .enumerate()
        .map(|(v, n)| {
            if !touched[v] {
                return Err(MeshError::IsolatedVertex { vertex: v });
            }
            let len = n.norm();
            if len == 0.0 {
                return Err(MeshError::IsolatedVertex { vertex: v });
            }
            Ok(n / len)
        })
        .collect()
}

/// Outcome of the exhaustive edge enumeration in [`check_watertight`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WatertightReport {
    pub is_closed: bool,
    pub is_edge_manifold: bool,
    pub is_consistently_oriented: bool,
    pub boundary_edges: Vec<(u32, u32)>,
    pub non_manifold_edges: Vec<(u32, u32)>,
}

impl WatertightReport {
    pub fn is_watertight(&self) -> bool {
        self.is_closed && self.is_edge_manifold && self.is_consistently_oriented
    }
}

impl std::fmt::Display for WatertightReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "closed={} edge_manifold={} consistently_oriented={} boundary_edges={} non_manifold_edges={}",
            self.is_closed,
            self.is_edge_manifold,
            self.is_consistently_oriented,
            self.boundary_edges.len(),
            self.non_manifold_edges.len()
        )
    }
}

pub fn check_watertight(mesh: &TriangleMesh) -> WatertightReport {
    use std::collections::BTreeMap;
    // undirected edge -> (count a->b with a<b, count b->a)
    let mut edges: BTreeMap<(u32, u32), (u32, u32)> = BTreeMap::new();
    for f in mesh.faces() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            let e = edges.entry((a.min(b), a.max(b))).or_default();
            if a < b {
                e.0 += 1;
            } else {
                e.1 += 1;
            }
        }
    }
    let mut boundary_edges = Vec::new();
    let mut non_manifold_edges = Vec::new();
    let mut oriented = true;
    for (&e, &(fwd, bwd)) in &edges {
        match fwd + bwd {
            1 => boundary_edges.push(e),
            2 => {}
            _ => non_manifold_edges.push(e),
        }
        if fwd > 1 || bwd > 1 {
            oriented = false;
        }
    }
    WatertightReport {
        is_closed: boundary_edges.is_empty(),
        is_edge_manifold: non_manifold_edges.is_empty(),
        is_consistently_oriented: oriented,
        boundary_edges,
        non_manifold_edges,
    }
}

/// Enclosed volume; positive for outward-facing orientation.
pub fn signed_volume(mesh: &TriangleMesh) -> Result<f64, MeshError> {
    if mesh.is_empty() {
        return Err(MeshError::Empty);
    }
    let report = check_watertight(mesh);
    if !report.is_closed || !report.is_consistently_oriented {
        return Err(MeshError::NotWatertight(report));
    }
    Ok(signed_volume_unchecked(mesh))
}

/// Sum of tetrahedron volumes against the bounding-box center, without the
/// closedness check.
pub fn signed_volume_unchecked(mesh: &TriangleMesh) -> f64 {
    if mesh.num_vertices() == 0 {
        return 0.0;
    }
    let (lo, hi) = mesh.bounding_box();
    let c = Point::from((lo.coords + hi.coords) * 0.5);
    let mut sum = 0.0;
    for f in 0..mesh.num_faces() {
        let [a, b, d] = mesh.face_points(f);
        sum += (a - c).dot(&(b - c).cross(&(d - c)));
    }
    sum / 6.0
}

/// Sum of interior angles at each vertex over its incident faces.
pub fn angle_sums(mesh: &TriangleMesh) -> Vec<f64> {
    let mut sums = vec![0.0; mesh.num_vertices()];
    for f in 0..mesh.num_faces() {
        let face = mesh.face(f);
        for corner in 0..3 {
            sums[face[corner] as usize] += mesh.corner_angle(f, corner);
        }
    }
    sums
}

pub(crate) const TWO_PI: f64 = 2.0 * PI;
