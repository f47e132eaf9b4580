use super::embed::{EmbeddedFeature, Embedding};
use super::triangulate::triangulate_element;
use super::{StyleKind, TextureError, TextureStyle};
use crate::config::TextureConfig;
use crate::exec::Execution;
use crate::mesh::{check_watertight, Point, TriangleMesh, Vector};
use crate::surface_map::{barycentric2, Vec2};
use std::collections::{HashMap, HashSet};

/// Turns embedded outlines into relief along the smoothed surface normals
/// recorded for each feature.
pub fn offset_texture(
    embedding: &Embedding,
    style: &TextureStyle,
    config: &TextureConfig,
    exec: Execution,
) -> Result<TriangleMesh, TextureError> {
    style.validate(config.min_wall)?;
    if embedding.features.is_empty() {
        return Ok(embedding.mesh.clone());
    }
    let mesh = &embedding.mesh;
    if style.kind == StyleKind::Recessed {
        check_recess_depth(mesh, &embedding.features, style.height, exec)?;
    }
    let d = match style.kind {
        StyleKind::Raised | StyleKind::Hollow => style.height,
        StyleKind::Recessed => -style.height,
    };

    let mut vertices = mesh.vertices().to_vec();
    let mut faces = mesh.faces().to_vec();
    // owner placement of every face that is new or moved
    let mut owner: HashMap<u32, usize> = HashMap::new();
    for feat in &embedding.features {
        let mut lifted: HashMap<u32, u32> = HashMap::new();
        for l in &feat.loops {
            for &b in l {
                let p = mesh.vertex(b as usize) + feat.normals[&b] * d;
                vertices.push(p);
                lifted.insert(b, (vertices.len() - 1) as u32);
            }
        }
        for &v in &feat.interior {
            vertices[v as usize] = mesh.vertex(v as usize) + feat.normals[&v] * d;
        }
        for &f in &feat.cap_faces {
            let face = &mut faces[f as usize];
            *face = face.map(|v| lifted.get(&v).copied().unwrap_or(v));
            owner.insert(f, feat.placement);
        }
        for l in &feat.loops {
            for k in 0..l.len() {
                let (a, b) = (l[k], l[(k + 1) % l.len()]);
                let (a2, b2) = (lifted[&a], lifted[&b]);
                for f in [[a, b, b2], [a, b2, a2]] {
                    owner.insert(faces.len() as u32, feat.placement);
                    faces.push(f);
                }
            }
        }
        if style.kind == StyleKind::Hollow {
            let wall = style.wall_thickness.unwrap_or(config.min_wall);
            for f in cavity(mesh, feat, style.height - wall, wall, &mut vertices)? {
                owner.insert(faces.len() as u32, feat.placement);
                faces.push(f);
            }
        }
    }

    check_self_intersection(&vertices, &faces, &owner, exec)?;
    collapse_short_edges(&mut vertices, &mut faces, config.min_edge);
    let out = TriangleMesh::new(vertices, faces)?.compacted();
    let report = check_watertight(&out);
    if !report.is_watertight() {
        return Err(TextureError::NotWatertight(report.to_string()));
    }
    Ok(out)
}

/// Closed, inward-facing prism under the cap: the element inset by `wall`,
/// from the original surface up to `top` along the normals.
fn cavity(
    mesh: &TriangleMesh,
    feat: &EmbeddedFeature,
    top: f64,
    wall: f64,
    vertices: &mut Vec<Point>,
) -> Result<Vec<[u32; 3]>, TextureError> {
    let inner = feature_element(feat)?.inset(wall)?;
    let tri = triangulate_element(&inner)?;
    let base = vertices.len() as u32;
    let n = tri.points.len() as u32;
    let mut tops = Vec::with_capacity(tri.points.len());
    for &q in &tri.points {
        let (p, nrm) = lift_onto_cap(mesh, feat, q).ok_or_else(|| TextureError::NotFit {
            placement: feat.placement,
            reason: "cavity leaves the cap".into(),
        })?;
        vertices.push(p);
        tops.push(p + nrm * top);
    }
    vertices.extend(tops);
    let mut faces = Vec::new();
    // outward prism first, flipped at the end
    for t in &tri.triangles {
        faces.push([base + t[0], base + t[2], base + t[1]]);
        faces.push(t.map(|v| base + n + v));
    }
    let mut start = 0u32;
    for ring in inner.rings() {
        let len = ring.len() as u32;
        for k in 0..len {
            let (a, b) = (base + start + k, base + start + (k + 1) % len);
            faces.push([a, b, b + n]);
            faces.push([a, b + n, a + n]);
        }
        start += len;
    }
    Ok(faces.into_iter().map(|[a, b, c]| [a, c, b]).collect())
}

/// The element outline in placement coordinates, recovered from the cap.
fn feature_element(feat: &EmbeddedFeature) -> Result<super::TextureElement, TextureError> {
    let mut coord: HashMap<u32, Vec2> = HashMap::new();
    for (ids, pts) in &feat.cap_triangles {
        for k in 0..3 {
            coord.insert(ids[k], pts[k]);
        }
    }
    let mut rings = feat.loops.iter().map(|l| l.iter().map(|v| coord[v]).collect::<Vec<_>>());
    let outer = rings.next().unwrap_or_default();
    super::TextureElement::new(outer, rings.collect(), super::ElementSource::Sketch)
}

fn lift_onto_cap(mesh: &TriangleMesh, feat: &EmbeddedFeature, q: Vec2) -> Option<(Point, Vector)> {
    let mut best: Option<(f64, usize, [f64; 3])> = None;
    for (i, (_, pts)) in feat.cap_triangles.iter().enumerate() {
        let Some(b) = barycentric2(q, *pts) else { continue };
        let worst = b[0].min(b[1]).min(b[2]);
        if worst >= -1e-9 && best.is_none_or(|(w, _, _)| worst > w) {
            best = Some((worst, i, b));
        }
    }
    let (_, i, b) = best?;
    let ids = feat.cap_triangles[i].0;
    let mut p = Vector::zeros();
    let mut n = Vector::zeros();
    for k in 0..3 {
        p += mesh.vertex(ids[k] as usize).coords * b[k];
        n += feat.normals[&ids[k]] * b[k];
    }
    Some((Point::from(p), n.try_normalize(0.0)?))
}

/// Casts a ray inward from every cap vertex and compares the depth with the
/// distance to the opposite side of the shell.
fn check_recess_depth(
    mesh: &TriangleMesh,
    features: &[EmbeddedFeature],
    depth: f64,
    exec: Execution,
) -> Result<(), TextureError> {
    for feat in features {
        let cap: HashSet<u32> = feat.cap_faces.iter().copied().collect();
        let verts: Vec<u32> = feat.loops.iter().flatten().chain(&feat.interior).copied().collect();
        let hits = exec.map(&verts, |&v| {
            let o = mesh.vertex(v as usize);
            let dir = -feat.normals[&v];
            let mut best = f64::INFINITY;
            for f in 0..mesh.num_faces() {
                let face = mesh.face(f);
                if cap.contains(&(f as u32)) || face.contains(&v) {
                    continue;
                }
                if let Some(t) = ray_triangle(&o, &dir, mesh.face_points(f)) {
                    best = best.min(t);
                }
            }
            best
        });
        let available = hits.into_iter().fold(f64::INFINITY, f64::min);
        if depth >= available {
            return Err(TextureError::RecessTooDeep {
                placement: feat.placement,
                depth,
                available,
            });
        }
    }
    Ok(())
}

fn ray_triangle(o: &Point, dir: &Vector, [a, b, c]: [Point; 3]) -> Option<f64> {
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-14 * e1.norm() * e2.norm() {
        return None;
    }
    let inv = 1.0 / det;
    let s = o - a;
    let u = s.dot(&p) * inv;
    if !(-1e-12..=1.0 + 1e-12).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < -1e-12 || u + v > 1.0 + 1e-12 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > 1e-12).then_some(t)
}

/// Tests every new or moved face against all faces whose bounding boxes
/// overlap it; pairs sharing a vertex are skipped.
fn check_self_intersection(
    vertices: &[Point],
    faces: &[[u32; 3]],
    owner: &HashMap<u32, usize>,
    exec: Execution,
) -> Result<(), TextureError> {
    let tri = |f: usize| faces[f].map(|v| vertices[v as usize]);
    let boxes: Vec<(Point, Point)> = (0..faces.len())
        .map(|f| {
            let p = tri(f);
            (
                p[0].inf(&p[1]).inf(&p[2]),
                p[0].sup(&p[1]).sup(&p[2]),
            )
        })
        .collect();
    let mut order: Vec<usize> = (0..faces.len()).collect();
    order.sort_by(|&a, &b| boxes[a].0.x.total_cmp(&boxes[b].0.x).then(a.cmp(&b)));
    let changed: Vec<usize> = {
        let mut c: Vec<usize> = owner.keys().map(|&f| f as usize).collect();
        c.sort_unstable();
        c
    };
    let firsts: Vec<f64> = order.iter().map(|&f| boxes[f].0.x).collect();
    let found = exec.map(&changed, |&f| {
        let (lo, hi) = boxes[f];
        let end = firsts.partition_point(|&x| x <= hi.x);
        for &g in &order[..end] {
            if g == f || (owner.contains_key(&(g as u32)) && g < f) {
                continue;
            }
            let (glo, ghi) = boxes[g];
            if ghi.x < lo.x || ghi.y < lo.y || glo.y > hi.y || ghi.z < lo.z || glo.z > hi.z {
                continue;
            }
            if faces[f].iter().any(|v| faces[g].contains(v)) {
                continue;
            }
            if triangles_intersect(tri(f), tri(g)) {
                return Some((f, g));
            }
        }
        None
    });
    if let Some((f, g)) = found.into_iter().flatten().next() {
        return Err(TextureError::SelfIntersectingOffset {
            placement: owner[&(f as u32)],
            a: f as u32,
            b: g as u32,
        });
    }
    Ok(())
}

/// True when an edge of one triangle passes through the interior of the
/// other. Coplanar overlaps are not reported.
pub(crate) fn triangles_intersect(a: [Point; 3], b: [Point; 3]) -> bool {
    let edge_hits = |s: &[Point; 3], t: [Point; 3]| {
        (0..3).any(|k| segment_triangle(&s[k], &s[(k + 1) % 3], t))
    };
    edge_hits(&a, b) || edge_hits(&b, a)
}

fn segment_triangle(p: &Point, q: &Point, [a, b, c]: [Point; 3]) -> bool {
    let dir = q - p;
    let e1 = b - a;
    let e2 = c - a;
    let h = dir.cross(&e2);
    let det = e1.dot(&h);
    let scale = e1.norm() * e2.norm() * dir.norm();
    if det.abs() <= 1e-10 * scale {
        return false;
    }
    let inv = 1.0 / det;
    let s = p - a;
    let u = s.dot(&h) * inv;
    let qv = s.cross(&e1);
    let v = dir.dot(&qv) * inv;
    let t = e2.dot(&qv) * inv;
    const EPS: f64 = 1e-9;
    u > EPS && v > EPS && u + v < 1.0 - EPS && t > EPS && t < 1.0 - EPS
}

/// Collapses edges shorter than `min_edge` to their midpoint when the link
/// condition holds, dropping the two faces that shared the edge.
pub(crate) fn collapse_short_edges(vertices: &mut [Point], faces: &mut Vec<[u32; 3]>, min_edge: f64) {
    loop {
        let short = faces.iter().flat_map(|f| (0..3).map(move |k| (f[k], f[(k + 1) % 3]))).find(|&(a, b)| {
            (vertices[a as usize] - vertices[b as usize]).norm() < min_edge && link_condition(faces, a, b)
        });
        let Some((a, b)) = short else { break };
        let mid = Point::from((vertices[a as usize].coords + vertices[b as usize].coords) * 0.5);
        vertices[a as usize] = mid;
        faces.retain(|f| !(f.contains(&a) && f.contains(&b)));
        for f in faces.iter_mut() {
            for v in f.iter_mut() {
                if *v == b {
                    *v = a;
                }
            }
        }
    }
}

fn link_condition(faces: &[[u32; 3]], a: u32, b: u32) -> bool {
    let ring = |x: u32| -> HashSet<u32> {
        faces
            .iter()
            .filter(|f| f.contains(&x))
            .flat_map(|f| f.iter().copied())
            .filter(|&v| v != x)
            .collect()
    };
    let shared: HashSet<u32> = ring(a).intersection(&ring(b)).copied().collect();
    let opposite: HashSet<u32> = faces
        .iter()
        .filter(|f| f.contains(&a) && f.contains(&b))
        .flat_map(|f| f.iter().copied())
        .filter(|&v| v != a && v != b)
        .collect();
    opposite.len() == 2 && shared == opposite
}
