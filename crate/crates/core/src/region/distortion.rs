use super::RegionError;
use crate::config::RegionConfig;
use crate::exec::Execution;
use crate::mesh::{Point, Topology, TriangleMesh, TWO_PI};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Per-vertex distortion `D(i)` for a probe radius `R`.
///
/// `D(i)` is the largest fraction of a full turn missing from the geodesic
/// disks around `i` of radius `0 <= r <= R`: the integrated angle deficit of
/// interior vertices within edge-path distance `r`, divided by `2π` and
/// capped at 1. At `r = 0` this is the angle deficit of `i` itself.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionField {
    values: Vec<f64>,
    radius: f64,
}

impl DistortionField {
    pub fn compute(mesh: &TriangleMesh, radius: f64, exec: Execution) -> Result<Self, RegionError> {
        Self::compute_with(mesh, &mesh.topology(), radius, exec)
    }

    pub(crate) fn compute_with(
        mesh: &TriangleMesh,
        topo: &Topology,
        radius: f64,
        exec: Execution,
    ) -> Result<Self, RegionError> {
        if !(radius > 0.0) {
            return Err(RegionError::InvalidParameter(format!("radius must be positive, got {radius}")));
        }
        for f in 0..mesh.num_faces() {
            if mesh.face_normal(f).is_none() {
                return Err(RegionError::DegenerateFace {
                    face: f,
                    vertex: mesh.face(f)[0],
                });
            }
        }
        let deficits = deficits(mesh, topo);
        let values = exec.map_range(mesh.num_vertices(), |v| {
            distortion_at(mesh, topo, &deficits, v as u32, radius)
        });
        Ok(DistortionField { values, radius })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// `D(vertex)` for one vertex; see [`DistortionField`].
pub fn vertex_distortion(mesh: &TriangleMesh, vertex: u32, radius: f64) -> Result<f64, RegionError> {
    if !(radius > 0.0) {
        return Err(RegionError::InvalidParameter(format!("radius must be positive, got {radius}")));
    }
    if vertex as usize >= mesh.num_vertices() {
        return Err(RegionError::InvalidParameter(format!("vertex {vertex} out of range")));
    }
    let topo = mesh.topology();
    for &f in topo.faces_of_vertex(vertex) {
        if mesh.face_normal(f as usize).is_none() {
            return Err(RegionError::DegenerateFace { face: f as usize, vertex });
        }
    }
    let deficits = deficits(mesh, &topo);
    Ok(distortion_at(mesh, &topo, &deficits, vertex, radius))
}

/// `2π − Σ angles` for interior vertices, 0 on the mesh boundary.
fn deficits(mesh: &TriangleMesh, topo: &Topology) -> Vec<f64> {
    let mut sums = vec![0.0; mesh.num_vertices()];
    for f in 0..mesh.num_faces() {
        let face = mesh.face(f);
        for corner in 0..3 {
            sums[face[corner] as usize] += mesh.corner_angle(f, corner);
        }
    }
    sums.iter()
        .enumerate()
        .map(|(v, &s)| {
            if topo.is_boundary_vertex(v as u32) || topo.faces_of_vertex(v as u32).is_empty() {
                0.0
            } else {
                TWO_PI - s
            }
        })
        .collect()
}

#[derive(PartialEq)]
struct Entry(f64, u32);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

fn distortion_at(mesh: &TriangleMesh, topo: &Topology, deficits: &[f64], v: u32, radius: f64) -> f64 {
    // Bounded Dijkstra; settled vertices come out in distance order.
    let mut dist: std::collections::HashMap<u32, f64> = std::collections::HashMap::new();
    let mut heap = BinaryHeap::new();
    let mut settled: Vec<(f64, u32)> = Vec::new();
    dist.insert(v, 0.0);
    heap.push(Entry(0.0, v));
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[&u] {
            continue;
        }
        settled.push((d, u));
        let pu = mesh.vertex(u as usize);
        for &w in topo.neighbors(u) {
            let nd = d + (mesh.vertex(w as usize) - pu).norm();
            if nd > radius {
                continue;
            }
            if dist.get(&w).is_none_or(|&old| nd < old) {
                dist.insert(w, nd);
                heap.push(Entry(nd, w));
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut acc = 0.0;
    for (i, &(d, u)) in settled.iter().enumerate() {
        acc += deficits[u as usize];
        let group_ends = settled.get(i + 1).is_none_or(|&(next, _)| next > d);
        if group_ends {
            best = best.max(acc / TWO_PI);
        }
    }
    best.min(1.0)
}

/// Greedy terminal selection: repeatedly take the vertex with the highest
/// `D / (1 + d / s)` among those with `D >= threshold` that keep at least
/// `s * separation_fraction` from every vertex already chosen. `d` is the
/// distance to `cursor` and `s` the bounding-box diagonal.
pub fn select_terminal_vertices(
    mesh: &TriangleMesh,
    field: &DistortionField,
    cursor: Point,
    config: &RegionConfig,
) -> Result<Vec<u32>, RegionError> {
    if config.k < 2 {
        return Err(RegionError::InvalidParameter(format!("k must be at least 2, got {}", config.k)));
    }
    if !(config.threshold > 0.0 && config.threshold <= 1.0) {
        return Err(RegionError::InvalidParameter(format!(
            "threshold must be in (0, 1], got {}",
            config.threshold
        )));
    }
    let s = mesh.bounding_diagonal();
    let min_sep = s * config.separation_fraction;
    let mut candidates: Vec<(f64, u32)> = field
        .values()
        .iter()
        .enumerate()
        .filter(|(_, &d)| d >= config.threshold)
        .map(|(v, &d)| {
            let dist = (mesh.vertex(v) - cursor).norm();
            (d / (1.0 + dist / s), v as u32)
        })
        .collect();
    candidates.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut chosen: Vec<u32> = Vec::new();
    for (_, v) in candidates {
        if chosen.len() == config.k {
            break;
        }
        let p = mesh.vertex(v as usize);
        if chosen
            .iter()
            .all(|&c| (mesh.vertex(c as usize) - p).norm() >= min_sep)
        {
            chosen.push(v);
        }
    }
    Ok(chosen)
}
