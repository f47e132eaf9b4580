//! Region inference under a cursor: distortion field, terminal vertices,
//! harmonic fields and isoline cuts.

mod distortion;
mod harmonic;
mod isoline;

pub use distortion::{select_terminal_vertices, vertex_distortion, DistortionField};
pub use harmonic::{cotangent_laplacian, harmonic_field, harmonic_field_pinned, Laplacian, ScalarField};
pub use isoline::{extract_isoline, IsoLoop};

use crate::config::RegionConfig;
use crate::exec::Execution;
use crate::mesh::{Point, Topology, TriangleMesh};
use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("face {face} incident to vertex {vertex} is degenerate")]
    DegenerateFace { face: usize, vertex: u32 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("source and sink sets must be non-empty and disjoint")]
    BadPins,
    #[error("connected component of {} vertices (first {first}) has no pinned value", .size)]
    UnconstrainedComponent { first: u32, size: usize },
    #[error("harmonic solve stalled at residual {residual:e}")]
    NotConverged { residual: f64 },
    #[error("isovalue {iso} is not strictly inside the field range [{min}, {max}]")]
    IsovalueOutOfRange { iso: f64, min: f64, max: f64 },
    #[error("cursor ({x}, {y}, {z}) does not hit the mesh")]
    NoHit { x: f64, y: f64, z: f64 },
    #[error("region query cancelled")]
    Cancelled,
    #[error("face list line {line}: {message}")]
    FaceList { line: usize, message: String },
}

/// A point on a mesh edge: `(1 - t) * p[a] + t * p[b]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EdgePoint {
    pub a: u32,
    pub b: u32,
    pub t: f64,
}

impl EdgePoint {
    pub fn position(&self, mesh: &TriangleMesh) -> Point {
        let pa = mesh.vertex(self.a as usize);
        let pb = mesh.vertex(self.b as usize);
        pa + (pb - pa) * self.t
    }
}

/// Connected set of faces together with the closed loops bounding it.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SurfaceRegion {
    faces: Vec<u32>,
    pub boundary_loops: Vec<Vec<EdgePoint>>,
}

impl SurfaceRegion {
    /// Builds a region from a face set, deriving its boundary loops.
    pub fn from_faces(mesh: &TriangleMesh, topo: &Topology, faces: impl IntoIterator<Item = u32>) -> Self {
        let mut faces: Vec<u32> = faces.into_iter().collect();
        faces.sort_unstable();
        faces.dedup();
        let mut mask = vec![false; mesh.num_faces()];
        for &f in &faces {
            mask[f as usize] = true;
        }
        let boundary_loops = boundary_loops(mesh, topo, &faces, &mask);
        SurfaceRegion {
            faces,
            boundary_loops,
        }
    }

    pub fn whole(mesh: &TriangleMesh) -> Self {
        let topo = mesh.topology();
        Self::from_faces(mesh, &topo, 0..mesh.num_faces() as u32)
    }

    /// Sorted face indices.
    pub fn faces(&self) -> &[u32] {
        &self.faces
    }

    pub fn contains(&self, face: u32) -> bool {
        self.faces.binary_search(&face).is_ok()
    }

    pub fn mask(&self, num_faces: usize) -> Vec<bool> {
        let mut m = vec![false; num_faces];
        for &f in &self.faces {
            if (f as usize) < num_faces {
                m[f as usize] = true;
            }
        }
        m
    }

    /// Checks connectivity and boundary consistency against `mesh`.
    pub fn validate(&self, mesh: &TriangleMesh, topo: &Topology) -> Result<(), String> {
        if self.faces.is_empty() {
            return Err("region has no faces".into());
        }
        let mask = self.mask(mesh.num_faces());
        let mut seen = vec![false; mesh.num_faces()];
        let mut stack = vec![self.faces[0]];
        seen[self.faces[0] as usize] = true;
        let mut count = 0;
        while let Some(f) = stack.pop() {
            count += 1;
            for g in topo.face_neighbors(f).into_iter().flatten() {
                if mask[g as usize] && !seen[g as usize] {
                    seen[g as usize] = true;
                    stack.push(g);
                }
            }
        }
        if count != self.faces.len() {
            return Err(format!("region is disconnected ({count} of {} faces reachable)", self.faces.len()));
        }
        for lp in &self.boundary_loops {
            if lp.len() < 3 {
                return Err("boundary loop with fewer than 3 points".into());
            }
            for (i, p) in lp.iter().enumerate() {
                let inside = topo
                    .faces_of_edge(p.a, p.b)
                    .iter()
                    .filter(|&&f| mask[f as usize])
                    .count();
                if inside != 1 {
                    return Err(format!("boundary point on edge ({}, {}) has {inside} region faces", p.a, p.b));
                }
                let next = lp[(i + 1) % lp.len()];
                if p.b != next.a {
                    return Err("boundary loop does not chain".into());
                }
            }
        }
        Ok(())
    }
}

fn boundary_loops(mesh: &TriangleMesh, topo: &Topology, faces: &[u32], mask: &[bool]) -> Vec<Vec<EdgePoint>> {
    let mut outgoing: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for &f in faces {
        let face = mesh.face(f as usize);
        for k in 0..3 {
            let (a, b) = (face[k], face[(k + 1) % 3]);
            let inside = topo
                .faces_of_edge(a, b)
                .iter()
                .filter(|&&g| mask[g as usize])
                .count();
            if inside == 1 {
                outgoing.entry(a).or_default().push(b);
            }
        }
    }
    for targets in outgoing.values_mut() {
        targets.sort_unstable();
    }
    let mut loops = Vec::new();
    while let Some((&start, _)) = outgoing.iter().find(|(_, t)| !t.is_empty()) {
        let mut lp = Vec::new();
        let mut a = start;
        loop {
            let targets = outgoing.get_mut(&a).expect("boundary edges chain");
            if targets.is_empty() {
                break;
            }
            let b = targets.remove(0);
            lp.push(EdgePoint { a, b, t: 0.0 });
            a = b;
            if a == start {
                break;
            }
        }
        loops.push(lp);
    }
    loops
}

/// Cooperative cancellation flag shared between a query and its owner.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::SeqCst)
    }

    fn check(&self) -> Result<(), RegionError> {
        if self.is_cancelled() {
            Err(RegionError::Cancelled)
        } else {
            Ok(())
        }
    }
}

/// Closest point on triangle `[a, b, c]` to `p`, returned as barycentric
/// coordinates.
pub fn closest_point_barycentric(p: &Point, [a, b, c]: [Point; 3]) -> [f64; 3] {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return [1.0, 0.0, 0.0];
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return [0.0, 1.0, 0.0];
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return [1.0 - v, v, 0.0];
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return [0.0, 0.0, 1.0];
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return [1.0 - w, 0.0, w];
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return [0.0, 1.0 - w, w];
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    [1.0 - v - w, v, w]
}

/// Face closest to `p` with the barycentric coordinates of the closest point
/// and its distance. Ties go to the lowest face index.
pub fn closest_face(mesh: &TriangleMesh, p: &Point, exec: Execution) -> Option<(u32, [f64; 3], f64)> {
    let hits = exec.map_range(mesh.num_faces(), |f| {
        let pts = mesh.face_points(f);
        let bary = closest_point_barycentric(p, pts);
        let q = pts[0].coords * bary[0] + pts[1].coords * bary[1] + pts[2].coords * bary[2];
        (bary, (q - p.coords).norm())
    });
    let mut best: Option<(u32, [f64; 3], f64)> = None;
    for (f, (bary, d)) in hits.into_iter().enumerate() {
        if best.is_none_or(|b| d < b.2) {
            best = Some((f as u32, bary, d));
        }
    }
    best
}

/// Infers the surface region under `cursor`.
///
/// Pipeline: distortion field, terminal vertices, crease components through
/// the terminals, one harmonic field per crease that separates the cursor
/// side from the far side, and a 0.5 cut of every field. Without terminals
/// the region is the whole connected component under the cursor.
pub fn infer_region(
    mesh: &TriangleMesh,
    cursor: Point,
    config: &RegionConfig,
    cancel: &CancelToken,
    exec: Execution,
) -> Result<SurfaceRegion, RegionError> {
    if mesh.is_empty() {
        return Err(RegionError::NoHit {
            x: cursor.x,
            y: cursor.y,
            z: cursor.z,
        });
    }
    let diag = mesh.bounding_diagonal();
    let (hit_face, _, dist) = closest_face(mesh, &cursor, exec).expect("non-empty mesh");
    if dist > config.hit_tolerance_fraction * diag {
        return Err(RegionError::NoHit {
            x: cursor.x,
            y: cursor.y,
            z: cursor.z,
        });
    }
    cancel.check()?;

    let topo = mesh.topology();
    let component = topo
        .face_components()
        .into_iter()
        .find(|c| c.binary_search(&hit_face).is_ok())
        .expect("hit face belongs to a component");
    let (sub, face_map) = submesh(mesh, &component);
    let sub_topo = sub.topology();
    let sub_hit = component.binary_search(&hit_face).unwrap() as u32;
    let whole = || SurfaceRegion::from_faces(mesh, &topo, component.iter().copied());

    let field = DistortionField::compute_with(&sub, &sub_topo, config.radius_fraction * diag, exec)
        .map_err(|e| remap_vertex_error(e, &face_map))?;
    cancel.check()?;
    let terminals = select_terminal_vertices(&sub, &field, cursor, config)?;
    if terminals.is_empty() {
        return Ok(whole());
    }
    cancel.check()?;

    let crease: Vec<bool> = field
        .values()
        .iter()
        .map(|&d| d >= config.threshold)
        .collect();
    let creases = crease_components(&sub_topo, &crease, &terminals);

    // Faces reachable from the cursor without stepping over a crease edge.
    let mut cursor_side = vec![false; sub.num_faces()];
    let mut stack = vec![sub_hit];
    cursor_side[sub_hit as usize] = true;
    while let Some(f) = stack.pop() {
        let face = sub.face(f as usize);
        for k in 0..3 {
            let (a, b) = (face[k], face[(k + 1) % 3]);
            if crease[a as usize] && crease[b as usize] {
                continue;
            }
            if let Some(g) = sub_topo.face_neighbor(f, k) {
                if !cursor_side[g as usize] {
                    cursor_side[g as usize] = true;
                    stack.push(g);
                }
            }
        }
    }

    let laplacian = cotangent_laplacian(&sub);
    let mut keep = vec![true; sub.num_faces()];
    let mut active = 0;
    for comp in &creases {
        cancel.check()?;
        let mut band: Vec<u32> = comp
            .iter()
            .flat_map(|&v| sub_topo.neighbors(v).iter().copied())
            .filter(|&w| !crease[w as usize])
            .collect();
        band.sort_unstable();
        band.dedup();
        let (near, far): (Vec<u32>, Vec<u32>) = band.into_iter().partition(|&w| {
            sub_topo
                .faces_of_vertex(w)
                .iter()
                .any(|&f| cursor_side[f as usize])
        });
        if near.is_empty() || far.is_empty() {
            continue;
        }
        active += 1;
        let pins: Vec<(u32, f64)> = near
            .iter()
            .map(|&v| (v, 1.0))
            .chain(far.iter().map(|&v| (v, 0.0)))
            .collect();
        let u = harmonic_field_pinned(&sub, &laplacian, &pins, exec)?;
        for (f, k) in keep.iter_mut().enumerate() {
            let [a, b, c] = sub.face(f);
            let centroid = (u.values()[a as usize] + u.values()[b as usize] + u.values()[c as usize]) / 3.0;
            if centroid < config.isovalue {
                *k = false;
            }
        }
    }
    if active == 0 {
        return Ok(whole());
    }
    cancel.check()?;

    let mut seen = vec![false; sub.num_faces()];
    let mut stack = vec![sub_hit];
    seen[sub_hit as usize] = true;
    let mut faces = Vec::new();
    while let Some(f) = stack.pop() {
        faces.push(face_map[f as usize]);
        for g in sub_topo.face_neighbors(f).into_iter().flatten() {
            if keep[g as usize] && !seen[g as usize] {
                seen[g as usize] = true;
                stack.push(g);
            }
        }
    }
    Ok(SurfaceRegion::from_faces(mesh, &topo, faces))
}

/// Components (over mesh edges) of crease vertices. Components holding a
/// terminal come first, in terminal order; the rest follow by smallest
/// vertex, so a cut does not depend on which crease the k terminals fell on.
fn crease_components(topo: &Topology, crease: &[bool], terminals: &[u32]) -> Vec<Vec<u32>> {
    let mut label = vec![usize::MAX; crease.len()];
    let seeds = terminals
        .iter()
        .copied()
        .chain((0..crease.len() as u32).filter(|&v| crease[v as usize]));
    let mut out = Vec::new();
    for t in seeds {
        if label[t as usize] != usize::MAX {
            continue;
        }
        let id = out.len();
        label[t as usize] = id;
        let mut members = vec![t];
        let mut i = 0;
        while i < members.len() {
            let v = members[i];
            i += 1;
            for &w in topo.neighbors(v) {
                if crease[w as usize] && label[w as usize] == usize::MAX {
                    label[w as usize] = id;
                    members.push(w);
                }
            }
        }
        members.sort_unstable();
        out.push(members);
    }
    out
}

/// Mesh made of `faces` only; returns it with the map from its face ids
/// back to `mesh`.
fn submesh(mesh: &TriangleMesh, faces: &[u32]) -> (TriangleMesh, Vec<u32>) {
    let mut remap = vec![u32::MAX; mesh.num_vertices()];
    let mut vertices = Vec::new();
    let mut out_faces = Vec::with_capacity(faces.len());
    for &f in faces {
        let face = mesh.face(f as usize).map(|v| {
            if remap[v as usize] == u32::MAX {
                remap[v as usize] = vertices.len() as u32;
                vertices.push(mesh.vertex(v as usize));
            }
            remap[v as usize]
        });
        out_faces.push(face);
    }
    (
        TriangleMesh::from_parts_unchecked(vertices, out_faces),
        faces.to_vec(),
    )
}

fn remap_vertex_error(e: RegionError, face_map: &[u32]) -> RegionError {
    match e {
        RegionError::DegenerateFace { face, vertex } => RegionError::DegenerateFace {
            face: face_map[face] as usize,
            vertex,
        },
        other => other,
    }
}

/// One face index per line.
pub fn write_face_list(region: &SurfaceRegion) -> String {
    let mut s = String::with_capacity(region.faces.len() * 6);
    for f in &region.faces {
        s.push_str(&f.to_string());
        s.push('\n');
    }
    s
}

/// Parses a face list written by [`write_face_list`]. Blank lines and `#`
/// comments are ignored.
pub fn read_face_list(text: &str, num_faces: usize) -> Result<Vec<u32>, RegionError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f: u32 = line.parse().map_err(|_| RegionError::FaceList {
            line: i + 1,
            message: format!("not a face index: {line:?}"),
        })?;
        if f as usize >= num_faces {
            return Err(RegionError::FaceList {
                line: i + 1,
                message: format!("face {f} out of range ({num_faces} faces)"),
            });
        }
        out.push(f);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn closest_point_inside_and_outside() {
        let tri = [
            Point::new(0.0, 0.0, 0.0),
            Point::new(1.0, 0.0, 0.0),
            Point::new(0.0, 1.0, 0.0),
        ];
        let b = closest_point_barycentric(&Point::new(0.25, 0.25, 3.0), tri);
        assert!((b[1] - 0.25).abs() < 1e-15 && (b[2] - 0.25).abs() < 1e-15);
        assert_eq!(closest_point_barycentric(&Point::new(-1.0, -1.0, 0.0), tri), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn sphere_region_is_everything() {
        let m = fixtures::icosphere(10.0, 2);
        let r = infer_region(
            &m,
            Point::new(0.0, 0.0, 10.0),
            &RegionConfig::default(),
            &CancelToken::new(),
            Execution::default(),
        )
        .unwrap();
        assert_eq!(r.faces().len(), m.num_faces());
        assert!(r.boundary_loops.is_empty());
    }

    #[test]
    fn off_mesh_cursor_is_a_miss() {
        let m = fixtures::icosphere(10.0, 1);
        let e = infer_region(
            &m,
            Point::new(0.0, 0.0, 30.0),
            &RegionConfig::default(),
            &CancelToken::new(),
            Execution::Sequential,
        )
        .unwrap_err();
        assert!(matches!(e, RegionError::NoHit { .. }));
    }

    #[test]
    fn cancelled_token_stops_the_query() {
        let m = fixtures::icosphere(10.0, 1);
        let token = CancelToken::new();
        token.cancel();
        let e = infer_region(&m, Point::new(0.0, 0.0, 10.0), &RegionConfig::default(), &token, Execution::Sequential);
        assert_eq!(e.unwrap_err(), RegionError::Cancelled);
    }

    #[test]
    fn region_boundary_of_a_plane_patch() {
        let m = fixtures::grid_plane(4.0, 4.0, 4, 4);
        let topo = m.topology();
        let r = SurfaceRegion::from_faces(&m, &topo, 0..m.num_faces() as u32);
        assert_eq!(r.boundary_loops.len(), 1);
        assert_eq!(r.boundary_loops[0].len(), 16);
        r.validate(&m, &topo).unwrap();
    }

    #[test]
    fn face_list_round_trip() {
        let m = fixtures::grid_plane(2.0, 2.0, 2, 2);
        let topo = m.topology();
        let r = SurfaceRegion::from_faces(&m, &topo, [3, 1, 2]);
        let text = write_face_list(&r);
        assert_eq!(text, "1\n2\n3\n");
        assert_eq!(read_face_list(&text, m.num_faces()).unwrap(), vec![1, 2, 3]);
        assert!(read_face_list("99\n", m.num_faces()).is_err());
    }
}
