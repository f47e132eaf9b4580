use super::{EdgePoint, RegionError};
use crate::mesh::TriangleMesh;
use std::collections::BTreeMap;

/// One connected piece of an isoline.
#[derive(Debug, Clone, PartialEq)]
pub struct IsoLoop {
    /// Crossings in chain order; `t` is measured from `a` to `b` with `a < b`.
    pub points: Vec<EdgePoint>,
    /// Faces between consecutive crossings (`points.len()` of them when
    /// closed, one fewer when open).
    pub faces: Vec<u32>,
    /// False when the chain runs into the mesh boundary.
    pub closed: bool,
}

/// Level set of a per-vertex field. If some vertex carries exactly the
/// isovalue, the isovalue is nudged up by `1e-9 * (max − min)` until none
/// does.
pub fn extract_isoline(mesh: &TriangleMesh, field: &[f64], isovalue: f64) -> Result<Vec<IsoLoop>, RegionError> {
    let (min, max) = field
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(isovalue > min && isovalue < max) {
        return Err(RegionError::IsovalueOutOfRange { iso: isovalue, min, max });
    }
    let mut iso = isovalue;
    while field.contains(&iso) {
        iso += 1e-9 * (max - min);
    }
    let topo = mesh.topology();
    let crossing = |a: u32, b: u32| (field[a as usize] - iso) * (field[b as usize] - iso) < 0.0;
    // crossing edge -> faces containing it
    let mut edges: BTreeMap<(u32, u32), Vec<u32>> = BTreeMap::new();
    for &(a, b) in topo.edges() {
        if crossing(a, b) {
            edges.insert((a, b), topo.faces_of_edge(a, b).to_vec());
        }
    }
    let other_edge = |f: u32, e: (u32, u32)| -> Option<(u32, u32)> {
        let face = mesh.face(f as usize);
        (0..3)
            .map(|k| {
                let (a, b) = (face[k], face[(k + 1) % 3]);
                (a.min(b), a.max(b))
            })
            .find(|&c| c != e && crossing(c.0, c.1))
    };
    let point = |(a, b): (u32, u32)| EdgePoint {
        a,
        b,
        t: (iso - field[a as usize]) / (field[b as usize] - field[a as usize]),
    };

    let mut visited: BTreeMap<(u32, u32), bool> = edges.keys().map(|&e| (e, false)).collect();
    let mut loops = Vec::new();
    // Open chains first, starting from crossings on boundary edges.
    let starts: Vec<(u32, u32)> = edges
        .iter()
        .filter(|(_, fs)| fs.len() == 1)
        .map(|(&e, _)| e)
        .chain(edges.keys().copied())
        .collect();
    for start in starts {
        if visited[&start] {
            continue;
        }
        let mut points = vec![point(start)];
        let mut faces = Vec::new();
        visited.insert(start, true);
        let mut e = start;
        let mut came_from: Option<u32> = None;
        let mut closed = false;
        loop {
            let next_face = edges[&e].iter().copied().find(|&f| Some(f) != came_from);
            let Some(f) = next_face else { break };
            let Some(next) = other_edge(f, e) else { break };
            faces.push(f);
            if next == start {
                closed = true;
                break;
            }
            if visited[&next] {
                break;
            }
            visited.insert(next, true);
            points.push(point(next));
            came_from = Some(f);
            e = next;
        }
        loops.push(IsoLoop { points, faces, closed });
    }
    Ok(loops)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn midpoint_crossing() {
        let m = fixtures::strip(1);
        let field = [0.0, 0.0, 1.0, 1.0];
        let loops = extract_isoline(&m, &field, 0.5).unwrap();
        assert_eq!(loops.len(), 1);
        assert!(!loops[0].closed);
        assert!(loops[0].points.iter().all(|p| (p.t - 0.5).abs() < 1e-15));
    }

    #[test]
    fn out_of_range_isovalue() {
        let m = fixtures::strip(1);
        assert!(extract_isoline(&m, &[0.0, 0.0, 1.0, 1.0], 1.0).is_err());
    }

    #[test]
    fn exact_vertex_value_is_nudged() {
        let m = fixtures::strip(2);
        let field = [0.0, 0.0, 0.5, 0.5, 1.0, 1.0];
        let loops = extract_isoline(&m, &field, 0.5).unwrap();
        assert_eq!(loops.len(), 1);
        for p in &loops[0].points {
            assert!(p.t > 0.99 && p.t < 1.0 || p.t > 0.0 && p.t < 1e-6);
        }
    }

    #[test]
    fn cylinder_axial_field_has_one_loop() {
        let m = fixtures::cylinder(5.0, 20.0, 16, 8, false);
        let field: Vec<f64> = m.vertices().iter().map(|p| p.z / 20.0).collect();
        let loops = extract_isoline(&m, &field, 0.55).unwrap();
        assert_eq!(loops.len(), 1);
        assert!(loops[0].closed);
        assert_eq!(loops[0].faces.len(), loops[0].points.len());
    }
}
