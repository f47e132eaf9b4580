use super::element::{point_segment_distance, segment_distance, TextureElement};
use super::triangulate::{constrain, insert, Cdt};
use super::TextureError;
use crate::config::TextureConfig;
use crate::exec::Execution;
use crate::mesh::{Point, TriangleMesh, Vector};
use crate::region::{closest_point_barycentric, SurfaceRegion};
use crate::surface_map::{MeshView, Placement, SurfaceMap, UnfoldedChart, Vec2};
use spade::handles::{FixedFaceHandle, FixedVertexHandle, InnerTag};
use spade::Triangulation;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceLabel {
    Base,
    Cap(usize),
}

/// Mutable triangle soup with directed-edge adjacency; faces are killed,
/// never removed, until [`WorkMesh::finish`].
pub(crate) struct WorkMesh {
    vertices: Vec<Point>,
    faces: Vec<[u32; 3]>,
    alive: Vec<bool>,
    label: Vec<FaceLabel>,
    in_region: Vec<bool>,
    directed: HashMap<(u32, u32), u32>,
}

impl WorkMesh {
    fn new(mesh: &TriangleMesh, region: &SurfaceRegion) -> Self {
        let mut w = WorkMesh {
            vertices: mesh.vertices().to_vec(),
            faces: Vec::with_capacity(mesh.num_faces()),
            alive: Vec::new(),
            label: Vec::new(),
            in_region: Vec::new(),
            directed: HashMap::with_capacity(3 * mesh.num_faces()),
        };
        let mask = region.mask(mesh.num_faces());
        for (f, inside) in mesh.faces().iter().zip(mask) {
            w.add_face(*f, FaceLabel::Base, inside);
        }
        w
    }

    fn add_vertex(&mut self, p: Point) -> u32 {
        self.vertices.push(p);
        (self.vertices.len() - 1) as u32
    }

    fn add_face(&mut self, f: [u32; 3], label: FaceLabel, in_region: bool) -> u32 {
        let id = self.faces.len() as u32;
        for k in 0..3 {
            self.directed.insert((f[k], f[(k + 1) % 3]), id);
        }
        self.faces.push(f);
        self.alive.push(true);
        self.label.push(label);
        self.in_region.push(in_region);
        id
    }

    fn kill_face(&mut self, id: u32) {
        let f = self.faces[id as usize];
        for k in 0..3 {
            let e = (f[k], f[(k + 1) % 3]);
            if self.directed.get(&e) == Some(&id) {
                self.directed.remove(&e);
            }
        }
        self.alive[id as usize] = false;
    }

    fn normal(&self, f: u32) -> Option<crate::Vector> {
        let [a, b, c] = self.faces[f as usize].map(|v| self.vertices[v as usize]);
        (b - a).cross(&(c - a)).try_normalize(0.0)
    }

    fn closest_alive_face(&self, p: &Point) -> Option<(u32, f64)> {
        let mut best: Option<(u32, f64)> = None;
        for (f, face) in self.faces.iter().enumerate() {
            if !self.alive[f] {
                continue;
            }
            let pts = face.map(|v| self.vertices[v as usize]);
            let b = closest_point_barycentric(p, pts);
            let q = pts[0].coords * b[0] + pts[1].coords * b[1] + pts[2].coords * b[2];
            let d = (q - p.coords).norm();
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((f as u32, d));
            }
        }
        best
    }

    /// Compacts into a mesh, returning the vertex and face remaps.
    fn finish(self) -> (TriangleMesh, Vec<u32>, Vec<u32>) {
        let mut vmap = vec![u32::MAX; self.vertices.len()];
        let mut fmap = vec![u32::MAX; self.faces.len()];
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (i, f) in self.faces.iter().enumerate() {
            if !self.alive[i] {
                continue;
            }
            fmap[i] = faces.len() as u32;
            faces.push(f.map(|v| {
                let slot = &mut vmap[v as usize];
                if *slot == u32::MAX {
                    *slot = vertices.len() as u32;
                    vertices.push(self.vertices[v as usize]);
                }
                *slot
            }));
        }
        (TriangleMesh::from_parts_unchecked(vertices, faces), vmap, fmap)
    }
}

impl MeshView for WorkMesh {
    fn position(&self, v: u32) -> Point {
        self.vertices[v as usize]
    }

    fn face_vertices(&self, f: u32) -> [u32; 3] {
        self.faces[f as usize]
    }

    fn neighbor_across(&self, f: u32, k: usize) -> Option<u32> {
        let face = self.faces[f as usize];
        self.directed.get(&(face[(k + 1) % 3], face[k])).copied()
    }
}

/// One element inserted into the surface.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedFeature {
    pub placement: usize,
    /// Boundary loops as vertex chains, outer first, with the cap on the
    /// left of each directed edge.
    pub loops: Vec<Vec<u32>>,
    pub cap_faces: Vec<u32>,
    /// Cap vertices not on a loop.
    pub interior: Vec<u32>,
    /// Cap triangles in placement coordinates (element units times scale).
    pub cap_triangles: Vec<([u32; 3], [Vec2; 3])>,
    /// The placement scale, so element coordinates can be mapped onto the cap.
    pub scale: f64,
    /// Offset direction of every loop and interior vertex.
    pub normals: HashMap<u32, Vector>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub mesh: TriangleMesh,
    pub features: Vec<EmbeddedFeature>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Node {
    Mesh(u32),
    Loop(usize, usize),
    Cross(usize),
}

/// Inserts every placement's outline into the surface as constrained edges.
///
/// Placements are handled one at a time on a growing chart around each
/// anchor; an outline reaching a face already capped by an earlier
/// placement is reported as an overlap.
pub fn embed_texture(
    mesh: &TriangleMesh,
    region: &SurfaceRegion,
    placements: &[Placement],
    element: &TextureElement,
    config: &TextureConfig,
    exec: Execution,
) -> Result<Embedding, TextureError> {
    element.validate()?;
    if placements.is_empty() {
        return Ok(Embedding {
            mesh: mesh.clone(),
            features: Vec::new(),
        });
    }
    let map = SurfaceMap::new(mesh)?;
    let mut work = WorkMesh::new(mesh, region);
    let mut features = Vec::with_capacity(placements.len());
    for (i, p) in placements.iter().enumerate() {
        features.push(embed_one(&mut work, &map, i, p, element, config)?);
    }
    let (out, vmap, fmap) = work.finish();
    let corners = corner_normals(mesh, CREASE_DEG);
    for feat in &mut features {
        for l in &mut feat.loops {
            l.iter_mut().for_each(|v| *v = vmap[*v as usize]);
        }
        feat.interior.iter_mut().for_each(|v| *v = vmap[*v as usize]);
        feat.cap_faces.iter_mut().for_each(|f| *f = fmap[*f as usize]);
        for (ids, _) in &mut feat.cap_triangles {
            *ids = ids.map(|v| vmap[v as usize]);
        }
        let verts: Vec<u32> = feat.loops.iter().flatten().chain(&feat.interior).copied().collect();
        let normals = exec.map(&verts, |&v| smooth_normal(mesh, &corners, &out.vertex(v as usize)));
        feat.normals = verts.into_iter().zip(normals).collect();
    }
    Ok(Embedding { mesh: out, features })
}

/// Faces meeting at a vertex at more than this angle do not share a normal.
const CREASE_DEG: f64 = 30.0;

/// Angle-weighted normal of each face corner over the incident faces within
/// `crease_deg` of that face.
fn corner_normals(mesh: &TriangleMesh, crease_deg: f64) -> Vec<[Vector; 3]> {
    let cos_crease = crease_deg.to_radians().cos();
    let mut around: Vec<Vec<(usize, usize)>> = vec![Vec::new(); mesh.num_vertices()];
    for (f, face) in mesh.faces().iter().enumerate() {
        for (k, &v) in face.iter().enumerate() {
            around[v as usize].push((f, k));
        }
    }
    let normals: Vec<Vector> = (0..mesh.num_faces())
        .map(|f| mesh.face_normal(f).unwrap_or_else(Vector::zeros))
        .collect();
    (0..mesh.num_faces())
        .map(|f| {
            let face = mesh.face(f);
            std::array::from_fn(|k| {
                let mut acc = Vector::zeros();
                for &(g, c) in &around[face[k] as usize] {
                    if normals[g].dot(&normals[f]) >= cos_crease {
                        acc += normals[g] * mesh.corner_angle(g, c);
                    }
                }
                acc.try_normalize(0.0).unwrap_or(normals[f])
            })
        })
        .collect()
}

/// Normal at a point of the original surface, interpolated from the corner
/// normals of the face it lies on.
fn smooth_normal(mesh: &TriangleMesh, corners: &[[Vector; 3]], p: &Point) -> Vector {
    let mut best = (f64::INFINITY, 0usize, [1.0, 0.0, 0.0]);
    for f in 0..mesh.num_faces() {
        let pts = mesh.face_points(f);
        let b = closest_point_barycentric(p, pts);
        let q = pts[0].coords * b[0] + pts[1].coords * b[1] + pts[2].coords * b[2];
        let d = (q - p.coords).norm_squared();
        if d < best.0 {
            best = (d, f, b);
        }
    }
    let (_, f, b) = best;
    let c = &corners[f];
    (c[0] * b[0] + c[1] * b[1] + c[2] * b[2])
        .try_normalize(0.0)
        .or_else(|| mesh.face_normal(f))
        .unwrap_or_else(Vector::z)
}

fn not_fit(placement: usize, reason: impl Into<String>) -> TextureError {
    TextureError::NotFit {
        placement,
        reason: reason.into(),
    }
}

fn embed_one(
    work: &mut WorkMesh,
    map: &SurfaceMap<'_>,
    i: usize,
    placement: &Placement,
    element: &TextureElement,
    config: &TextureConfig,
) -> Result<EmbeddedFeature, TextureError> {
    let frame = map.local_frame(placement)?;
    let elem = element.scaled(placement.scale);
    let rings: Vec<Vec<Vec2>> = elem.rings().cloned().collect();
    let segments: Vec<(usize, usize, Vec2, Vec2)> = rings
        .iter()
        .enumerate()
        .flat_map(|(r, ring)| (0..ring.len()).map(move |k| (r, k, ring[k], ring[(k + 1) % ring.len()])))
        .collect();
    let min_edge = config.min_edge;
    let margin = 10.0 * min_edge;

    let (f0, _) = work
        .closest_alive_face(&frame.origin)
        .ok_or_else(|| not_fit(i, "mesh has no faces"))?;
    if let FaceLabel::Cap(j) = work.label[f0 as usize] {
        return Err(TextureError::Overlap { first: j, second: i });
    }
    if !work.in_region[f0 as usize] {
        return Err(not_fit(i, "anchor lies outside the region"));
    }
    let mut chart =
        UnfoldedChart::new(&*work, f0, frame.origin, frame.e1).ok_or_else(|| not_fit(i, "degenerate anchor face"))?;
    let cos_limit = config.max_chart_angle_deg.to_radians().cos();
    let n0 = work.normal(f0).ok_or_else(|| not_fit(i, "degenerate anchor face"))?;

    let dist_to_outline = |a: Vec2, b: Vec2| -> f64 {
        if elem.contains((a + b) * 0.5) {
            return 0.0;
        }
        segments
            .iter()
            .map(|&(_, _, p, q)| segment_distance(a, b, p, q))
            .fold(f64::INFINITY, f64::min)
    };

    loop {
        let near: Vec<(u32, u32, Option<u32>)> = chart
            .boundary_edges(&*work)
            .into_iter()
            .filter(|&(a, b, _)| dist_to_outline(chart.coord(a).unwrap(), chart.coord(b).unwrap()) < margin)
            .collect();
        if near.is_empty() && chart.lift(rings[0][0]).is_some() {
            break;
        }
        let grew = chart.grow_layer(&*work, |g| {
            let gi = g as usize;
            work.alive[gi]
                && work.in_region[gi]
                && work.label[gi] == FaceLabel::Base
                && work.normal(g).is_some_and(|n| n.dot(&n0) >= cos_limit)
        });
        if grew {
            continue;
        }
        for &(_, _, out) in &near {
            if let Some(g) = out {
                if let FaceLabel::Cap(j) = work.label[g as usize] {
                    return Err(TextureError::Overlap { first: j, second: i });
                }
            }
        }
        if near
            .iter()
            .any(|&(_, _, out)| out.is_none_or(|g| !work.in_region[g as usize]))
        {
            return Err(not_fit(i, "footprint crosses the region boundary"));
        }
        return Err(not_fit(
            i,
            format!("surface under the footprint bends more than {}°", config.max_chart_angle_deg),
        ));
    }

    // chart vertices and edges
    let mut chart_vertices: BTreeMap<u32, Vec2> = BTreeMap::new();
    let mut chart_edges: Vec<(u32, u32)> = Vec::new();
    let mut seen_edges = HashSet::new();
    for t in 0..chart.faces().len() {
        let (ids, pts) = chart.triangle(t);
        for k in 0..3 {
            chart_vertices.insert(ids[k], pts[k]);
            let (a, b) = (ids[k], ids[(k + 1) % 3]);
            if seen_edges.insert((a.min(b), a.max(b))) {
                chart_edges.push((a, b));
            }
        }
    }
    let boundary: HashSet<u32> = chart
        .boundary_edges(&*work)
        .into_iter()
        .flat_map(|(a, b, _)| [a, b])
        .collect();
    let near_outline = |p: Vec2| {
        segments
            .iter()
            .any(|&(_, _, a, b)| point_segment_distance(p, a, b) < min_edge)
    };
    let kept: HashSet<u32> = chart_vertices
        .iter()
        .filter(|&(v, p)| boundary.contains(v) || !near_outline(*p))
        .map(|(v, _)| *v)
        .collect();
    let kept_edges: Vec<(u32, u32)> = chart_edges
        .into_iter()
        .filter(|(a, b)| kept.contains(a) && kept.contains(b))
        .collect();

    // crossings between outline segments and kept chart edges
    let mut crossings: Vec<(u32, u32, f64, Vec2)> = Vec::new();
    let mut edge_splits: Vec<Vec<(f64, Node)>> = vec![Vec::new(); kept_edges.len()];
    let mut seg_splits: Vec<Vec<(f64, Node)>> = vec![Vec::new(); segments.len()];
    for (ei, &(a, b)) in kept_edges.iter().enumerate() {
        let (pa, pb) = (chart_vertices[&a], chart_vertices[&b]);
        let d = pb - pa;
        let len2 = d.norm_squared();
        for &(r, k, p, q) in &segments {
            if point_segment_distance(p, pa, pb) < min_edge {
                let s = ((p - pa).dot(&d) / len2).clamp(0.0, 1.0);
                let node = Node::Loop(r, k);
                if !edge_splits[ei].iter().any(|(_, n)| *n == node) {
                    edge_splits[ei].push((s, node));
                }
            }
            let Some((s, t)) = segment_params(pa, pb, p, q) else { continue };
            let x = pa + d * s;
            if (x - p).norm() < min_edge || (x - q).norm() < min_edge {
                // handled as a loop vertex close to the edge
                continue;
            }
            let node = Node::Cross(crossings.len());
            crossings.push((a, b, s, x));
            edge_splits[ei].push((s, node));
            let si = segments.iter().position(|&(rr, kk, _, _)| rr == r && kk == k).unwrap();
            seg_splits[si].push((t, node));
        }
    }

    // constrained triangulation of the chart with the outline
    let pos2 = |n: Node| -> Vec2 {
        match n {
            Node::Mesh(v) => chart_vertices[&v],
            Node::Loop(r, k) => rings[r][k],
            Node::Cross(c) => crossings[c].3,
        }
    };
    let mut cdt = Cdt::new();
    let mut handle_of: HashMap<Node, FixedVertexHandle> = HashMap::new();
    let mut node_of: HashMap<FixedVertexHandle, Node> = HashMap::new();
    let mut add = |cdt: &mut Cdt, n: Node| -> Result<FixedVertexHandle, TextureError> {
        if let Some(h) = handle_of.get(&n) {
            return Ok(*h);
        }
        let h = insert(cdt, pos2(n))?;
        handle_of.insert(n, h);
        node_of.entry(h).or_insert(n);
        Ok(h)
    };
    for &v in chart_vertices.keys().filter(|v| kept.contains(v)) {
        add(&mut cdt, Node::Mesh(v))?;
    }
    for (r, ring) in rings.iter().enumerate() {
        for k in 0..ring.len() {
            add(&mut cdt, Node::Loop(r, k))?;
        }
    }
    for c in 0..crossings.len() {
        add(&mut cdt, Node::Cross(c))?;
    }
    let mut chains: Vec<Vec<Node>> = Vec::new();
    for (ei, &(a, b)) in kept_edges.iter().enumerate() {
        let mut splits = std::mem::take(&mut edge_splits[ei]);
        splits.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut chain = vec![Node::Mesh(a)];
        chain.extend(splits.into_iter().map(|(_, n)| n));
        chain.push(Node::Mesh(b));
        chains.push(chain);
    }
    let mut loop_chains: Vec<Vec<Node>> = rings.iter().map(|_| Vec::new()).collect();
    for (si, &(r, k, _, _)) in segments.iter().enumerate() {
        let mut splits = std::mem::take(&mut seg_splits[si]);
        splits.sort_by(|x, y| x.0.total_cmp(&y.0));
        let n = rings[r].len();
        let mut chain = vec![Node::Loop(r, k)];
        chain.extend(splits.iter().map(|(_, n)| *n));
        chain.push(Node::Loop(r, (k + 1) % n));
        loop_chains[r].push(Node::Loop(r, k));
        loop_chains[r].extend(splits.into_iter().map(|(_, n)| n));
        chains.push(chain);
    }
    for chain in &chains {
        for w in chain.windows(2) {
            let (ha, hb) = (handle_of[&w[0]], handle_of[&w[1]]);
            constrain(&mut cdt, ha, hb).map_err(|_| not_fit(i, "outline could not be inserted into the surface"))?;
        }
    }

    // lift new vertices
    let mut vertex_of: HashMap<Node, u32> = HashMap::new();
    let mut resolve = |work: &mut WorkMesh, n: Node| -> Result<u32, TextureError> {
        let n = node_of[&handle_of[&n]];
        if let Some(v) = vertex_of.get(&n) {
            return Ok(*v);
        }
        let v = match n {
            Node::Mesh(v) => v,
            Node::Loop(..) => {
                let sp = chart
                    .lift(pos2(n))
                    .ok_or_else(|| not_fit(i, "outline vertex left the chart"))?;
                work.add_vertex(sp.position(&*work))
            }
            Node::Cross(c) => {
                let (a, b, s, _) = crossings[c];
                let (pa, pb) = (work.vertices[a as usize], work.vertices[b as usize]);
                work.add_vertex(pa + (pb - pa) * s)
            }
        };
        vertex_of.insert(n, v);
        Ok(v)
    };

    // classify by flooding from fenced edges: the chart boundary (chart on
    // the left) decides what is kept, the outline (cap on the left) the label
    let chart_fence: HashSet<(FixedVertexHandle, FixedVertexHandle)> = chart
        .boundary_edges(&*work)
        .into_iter()
        .map(|(a, b, _)| (handle_of[&Node::Mesh(a)], handle_of[&Node::Mesh(b)]))
        .collect();
    let mut loop_fence = HashSet::new();
    for chain in &loop_chains {
        for k in 0..chain.len() {
            let (a, b) = (handle_of[&chain[k]], handle_of[&chain[(k + 1) % chain.len()]]);
            if a != b {
                loop_fence.insert((a, b));
            }
        }
    }
    let kept_faces = flood(&cdt, &chart_fence);
    let in_cap = flood(&cdt, &loop_fence);

    let mut new_faces: Vec<([u32; 3], [Vec2; 3], FaceLabel)> = Vec::new();
    for face in cdt.inner_faces() {
        if kept_faces.get(&face.fix()) != Some(&true) {
            continue;
        }
        let hs = face.vertices().map(|v| v.fix());
        let pts = hs.map(|h| {
            let p = cdt.vertex(h).position();
            Vec2::new(p.x, p.y)
        });
        let cap = match in_cap.get(&face.fix()) {
            Some(&c) => c,
            None => elem.contains((pts[0] + pts[1] + pts[2]) / 3.0),
        };
        let label = if cap { FaceLabel::Cap(i) } else { FaceLabel::Base };
        let mut ids = [0u32; 3];
        for k in 0..3 {
            ids[k] = resolve(work, node_of[&hs[k]])?;
        }
        new_faces.push((ids, pts, label));
    }

    for &f in chart.faces() {
        work.kill_face(f);
    }
    let mut feature = EmbeddedFeature {
        placement: i,
        loops: Vec::new(),
        cap_faces: Vec::new(),
        interior: Vec::new(),
        cap_triangles: Vec::new(),
        scale: placement.scale,
        normals: HashMap::new(),
    };
    for (ids, pts, label) in new_faces {
        let id = work.add_face(ids, label, true);
        if label != FaceLabel::Base {
            feature.cap_faces.push(id);
            feature.cap_triangles.push((ids, pts));
        }
    }

    let mut on_loop = HashSet::new();
    for chain in loop_chains {
        let mut ids: Vec<u32> = Vec::with_capacity(chain.len());
        for n in chain {
            let v = resolve(work, n)?;
            if ids.last() != Some(&v) {
                ids.push(v);
            }
        }
        if ids.len() > 1 && ids.first() == ids.last() {
            ids.pop();
        }
        for k in 0..ids.len() {
            let (a, b) = (ids[k], ids[(k + 1) % ids.len()]);
            let ok = work
                .directed
                .get(&(a, b))
                .is_some_and(|&f| work.label[f as usize] == FaceLabel::Cap(i));
            if !ok {
                return Err(not_fit(i, "outline edge missing after insertion"));
            }
        }
        on_loop.extend(ids.iter().copied());
        feature.loops.push(ids);
    }
    let mut interior: Vec<u32> = feature
        .cap_triangles
        .iter()
        .flat_map(|(ids, _)| *ids)
        .filter(|v| !on_loop.contains(v))
        .collect();
    interior.sort_unstable();
    interior.dedup();
    feature.interior = interior;
    Ok(feature)
}

/// Splits the inner faces of `cdt` by the directed `fence` edges: faces
/// with a fence edge on their left are inside, those across one outside, and
/// the rest inherit from neighbors reached without crossing the fence.
fn flood(cdt: &Cdt, fence: &HashSet<(FixedVertexHandle, FixedVertexHandle)>) -> HashMap<FixedFaceHandle<InnerTag>, bool> {
    let mut state = HashMap::new();
    let mut queue = VecDeque::new();
    for face in cdt.inner_faces() {
        for e in face.adjacent_edges() {
            let (a, b) = (e.from().fix(), e.to().fix());
            let seed = if fence.contains(&(a, b)) {
                Some(true)
            } else if fence.contains(&(b, a)) {
                Some(false)
            } else {
                None
            };
            if let Some(inside) = seed {
                if state.insert(face.fix(), inside).is_none() {
                    queue.push_back(face.fix());
                }
            }
        }
    }
    while let Some(f) = queue.pop_front() {
        let inside = state[&f];
        for e in cdt.face(f).adjacent_edges() {
            let (a, b) = (e.from().fix(), e.to().fix());
            if fence.contains(&(a, b)) || fence.contains(&(b, a)) {
                continue;
            }
            if let Some(g) = e.rev().face().as_inner() {
                if let std::collections::hash_map::Entry::Vacant(slot) = state.entry(g.fix()) {
                    slot.insert(inside);
                    queue.push_back(g.fix());
                }
            }
        }
    }
    state
}

/// Parameters `(s, t)` where `a + s (b - a) = p + t (q - p)`, if the two
/// segments cross.
fn segment_params(a: Vec2, b: Vec2, p: Vec2, q: Vec2) -> Option<(f64, f64)> {
    let d1 = b - a;
    let d2 = q - p;
    let den = d1.x * d2.y - d1.y * d2.x;
    if den.abs() <= 1e-14 * d1.norm() * d2.norm() {
        return None;
    }
    let w = p - a;
    let s = (w.x * d2.y - w.y * d2.x) / den;
    let t = (w.x * d1.y - w.y * d1.x) / den;
    const EPS: f64 = 1e-12;
    if (-EPS..=1.0 + EPS).contains(&s) && (-EPS..=1.0 + EPS).contains(&t) {
        Some((s.clamp(0.0, 1.0), t.clamp(0.0, 1.0)))
    } else {
        None
    }
}
