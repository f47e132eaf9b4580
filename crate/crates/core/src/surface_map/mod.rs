//! 2D element coordinates to surface points: tangent frames, a discrete
//! exponential map by geodesic walking, and unfolded charts.

mod chart;

pub use chart::{barycentric2, UnfoldedChart, Vec2};

use crate::mesh::{vertex_normals, MeshError, Point, Topology, TriangleMesh, Vector};
use crate::region::SurfaceRegion;
use nalgebra::{Rotation3, Unit};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("invalid placement: {0}")]
    InvalidPlacement(String),
    #[error("face {face} is degenerate")]
    DegenerateFace { face: u32 },
    #[error("walk leaves the region across edge ({a}, {b})")]
    LeftRegion { a: u32, b: u32 },
    #[error("walk reaches the mesh boundary at edge ({a}, {b})")]
    MeshBoundary { a: u32, b: u32 },
    #[error("geodesic walk did not terminate")]
    WalkTooLong,
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// A point on a face given by barycentric coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub face: u32,
    pub bary: [f64; 3],
}

impl SurfacePoint {
    /// Clamps negative weights to zero and renormalizes.
    pub fn new_clamped(face: u32, bary: [f64; 3]) -> Self {
        let b = bary.map(|x| x.max(0.0));
        let s: f64 = b.iter().sum();
        let bary = if s > 0.0 { b.map(|x| x / s) } else { [1.0 / 3.0; 3] };
        SurfacePoint { face, bary }
    }

    pub fn position<M: MeshView + ?Sized>(&self, mesh: &M) -> Point {
        let v = mesh.face_vertices(self.face);
        let p = v.map(|v| mesh.position(v).coords);
        Point::from(p[0] * self.bary[0] + p[1] * self.bary[1] + p[2] * self.bary[2])
    }

    fn is_valid(&self) -> bool {
        self.bary.iter().all(|&x| x >= 0.0 && x.is_finite()) && (self.bary.iter().sum::<f64>() - 1.0).abs() <= 1e-12
    }
}

/// One instance of an element on the surface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    pub anchor: SurfacePoint,
    /// Radians about the surface normal, counter-clockwise from the
    /// projected +x axis.
    pub rotation: f64,
    pub scale: f64,
}

impl Placement {
    pub fn new(anchor: SurfacePoint, rotation: f64, scale: f64) -> Result<Self, MapError> {
        let p = Placement {
            anchor,
            rotation,
            scale,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), MapError> {
        if !self.anchor.is_valid() {
            return Err(MapError::InvalidPlacement(format!(
                "barycentric coordinates {:?} must be non-negative and sum to 1",
                self.anchor.bary
            )));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(MapError::InvalidPlacement(format!("scale must be positive, got {}", self.scale)));
        }
        if !self.rotation.is_finite() {
            return Err(MapError::InvalidPlacement("rotation is not finite".into()));
        }
        Ok(())
    }
}

/// Orthonormal frame at a placement anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentFrame {
    pub origin: Point,
    pub e1: Vector,
    pub e2: Vector,
    pub n: Vector,
    pub anchor: SurfacePoint,
    pub scale: f64,
}

impl TangentFrame {
    /// The same frame with unit scale.
    pub fn unscaled(mut self) -> Self {
        self.scale = 1.0;
        self
    }

    /// The same frame turned by `angle` about its normal.
    pub fn rotated(mut self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        let e1 = self.e1 * c + self.e2 * s;
        self.e1 = e1;
        self.e2 = self.n.cross(&e1);
        self
    }

    /// Tangent vector for 2D frame coordinates.
    pub fn tangent(&self, p: Vec2) -> Vector {
        self.e1 * p.x + self.e2 * p.y
    }
}

/// Minimal read access to a triangle mesh with face adjacency.
pub trait MeshView {
    fn position(&self, v: u32) -> Point;
    fn face_vertices(&self, f: u32) -> [u32; 3];
    /// Face across edge `k` (corner `k` to corner `k + 1`) of `f`.
    fn neighbor_across(&self, f: u32, k: usize) -> Option<u32>;
}

/// A mesh paired with its topology.
pub struct Indexed<'a> {
    pub mesh: &'a TriangleMesh,
    pub topo: &'a Topology,
}

impl MeshView for Indexed<'_> {
    fn position(&self, v: u32) -> Point {
        self.mesh.vertex(v as usize)
    }

    fn face_vertices(&self, f: u32) -> [u32; 3] {
        self.mesh.face(f as usize)
    }

    fn neighbor_across(&self, f: u32, k: usize) -> Option<u32> {
        self.topo.face_neighbor(f, k)
    }
}

/// Precomputed adjacency, normals and angle sums for repeated mapping on one
/// mesh, optionally confined to a region.
#[derive(Debug, Clone)]
pub struct SurfaceMap<'a> {
    mesh: &'a TriangleMesh,
    topo: Topology,
    normals: Vec<Vector>,
    angle_sums: Vec<f64>,
    region: Option<Vec<bool>>,
}

/// Records a walk for inspection.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WalkTrace {
    /// Straight pieces, each inside one face.
    pub segments: Vec<(u32, Point, Point)>,
}

impl WalkTrace {
    pub fn arclength(&self) -> f64 {
        self.segments.iter().map(|(_, a, b)| (b - a).norm()).sum()
    }
}

const MAX_STEPS: usize = 200_000;
const VERTEX_EPS: f64 = 1e-9;

impl<'a> SurfaceMap<'a> {
    pub fn new(mesh: &'a TriangleMesh) -> Result<Self, MapError> {
        let topo = mesh.topology();
        let normals = vertex_normals(mesh)?;
        let angle_sums = crate::mesh::angle_sums(mesh);
        Ok(SurfaceMap {
            mesh,
            topo,
            normals,
            angle_sums,
            region: None,
        })
    }

    /// Confines walks to `region`.
    pub fn with_region(mut self, region: &SurfaceRegion) -> Self {
        self.region = Some(region.mask(self.mesh.num_faces()));
        self
    }

    pub fn mesh(&self) -> &TriangleMesh {
        self.mesh
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn view(&self) -> Indexed<'_> {
        Indexed {
            mesh: self.mesh,
            topo: &self.topo,
        }
    }

    pub fn in_region(&self, f: u32) -> bool {
        self.region.as_ref().is_none_or(|m| m[f as usize])
    }

    pub fn position(&self, p: &SurfacePoint) -> Point {
        p.position(&self.view())
    }

    /// Interpolated vertex normal at a surface point.
    pub fn normal_at(&self, p: &SurfacePoint) -> Result<Vector, MapError> {
        let v = self.mesh.face(p.face as usize);
        let n = self.normals[v[0] as usize] * p.bary[0]
            + self.normals[v[1] as usize] * p.bary[1]
            + self.normals[v[2] as usize] * p.bary[2];
        match n.try_normalize(1e-12) {
            Some(n) => Ok(n),
            None => self
                .mesh
                .face_normal(p.face as usize)
                .ok_or(MapError::DegenerateFace { face: p.face }),
        }
    }

    pub fn local_frame(&self, placement: &Placement) -> Result<TangentFrame, MapError> {
        placement.validate()?;
        let f = placement.anchor.face;
        if f as usize >= self.mesh.num_faces() {
            return Err(MapError::InvalidPlacement(format!("face {f} out of range")));
        }
        self.mesh
            .face_normal(f as usize)
            .ok_or(MapError::DegenerateFace { face: f })?;
        let n = self.normal_at(&placement.anchor)?;
        let axis = if n.x.abs() > 1.0 - 1e-6 {
            Vector::y()
        } else {
            Vector::x()
        };
        let e1 = (axis - n * n.dot(&axis)).normalize();
        let frame = TangentFrame {
            origin: self.position(&placement.anchor),
            e1,
            e2: n.cross(&e1),
            n,
            anchor: placement.anchor,
            scale: placement.scale,
        };
        Ok(frame.rotated(placement.rotation))
    }

    /// Lands the 2D point `p` (scaled by `frame.scale`) on the surface by
    /// walking a straightest geodesic from the frame origin.
    pub fn map_point(&self, frame: &TangentFrame, p: Vec2) -> Result<SurfacePoint, MapError> {
        self.walk(frame, p, None)
    }

    /// Like [`map_point`](Self::map_point), also returning the walked path.
    pub fn trace(&self, frame: &TangentFrame, p: Vec2) -> Result<(SurfacePoint, WalkTrace), MapError> {
        let mut trace = WalkTrace::default();
        let end = self.walk(frame, p, Some(&mut trace))?;
        Ok((end, trace))
    }

    fn face_points(&self, f: u32) -> [Point; 3] {
        self.mesh.face_points(f as usize)
    }

    fn walk(&self, frame: &TangentFrame, p2d: Vec2, mut trace: Option<&mut WalkTrace>) -> Result<SurfacePoint, MapError> {
        let len = p2d.norm() * frame.scale;
        if len == 0.0 {
            return Ok(frame.anchor);
        }
        let tangent = frame.tangent(p2d / p2d.norm());
        let mut f = frame.anchor.face;
        let mut p = frame.origin;
        let mut remaining = len;
        let mut skip = Skip::None;
        let corner = frame.anchor.bary.iter().position(|&b| b > 1.0 - 1e-12);
        let mut d = match corner {
            Some(k) => {
                let v = self.mesh.face(f as usize)[k];
                let (g, dir) = self.leave_vertex_from_tangent(f, v, tangent, frame.n)?;
                f = g;
                skip = Skip::Vertex(v);
                dir
            }
            None => {
                let nf = self
                    .mesh
                    .face_normal(f as usize)
                    .ok_or(MapError::DegenerateFace { face: f })?;
                let rotated = Rotation3::rotation_between(&frame.n, &nf)
                    .map(|r| r * tangent)
                    .unwrap_or(-tangent);
                (rotated - nf * nf.dot(&rotated)).normalize()
            }
        };

        for _ in 0..MAX_STEPS {
            let pts = self.face_points(f);
            let nf = self
                .mesh
                .face_normal(f as usize)
                .ok_or(MapError::DegenerateFace { face: f })?;
            let verts = self.mesh.face(f as usize);
            let mut exit: Option<(f64, usize)> = None;
            for k in 0..3 {
                let (a, b) = (verts[k], verts[(k + 1) % 3]);
                if skip.excludes(a, b) {
                    continue;
                }
                let edge = pts[(k + 1) % 3] - pts[k];
                let m = edge.cross(&nf).normalize();
                let dn = d.dot(&m);
                if dn <= 1e-15 {
                    continue;
                }
                let dist = (pts[k] - p).dot(&m).max(0.0);
                let s = dist / dn;
                if exit.is_none_or(|(best, _)| s < best) {
                    exit = Some((s, k));
                }
            }
            let Some((s, k)) = exit else {
                return Err(MapError::WalkTooLong);
            };
            if s >= remaining {
                let end = p + d * remaining;
                if let Some(t) = trace.as_deref_mut() {
                    t.segments.push((f, p, end));
                }
                return Ok(self.locate_in_face(f, &end));
            }
            let (pa, pb) = (pts[k], pts[(k + 1) % 3]);
            let q = p + d * s;
            if let Some(t) = trace.as_deref_mut() {
                t.segments.push((f, p, q));
            }
            remaining -= s;
            let edge = pb - pa;
            let t = ((q - pa).dot(&edge) / edge.norm_squared()).clamp(0.0, 1.0);
            let (a, b) = (verts[k], verts[(k + 1) % 3]);
            if t < VERTEX_EPS || t > 1.0 - VERTEX_EPS {
                let v = if t < 0.5 { a } else { b };
                let (g, dir) = self.pass_vertex(f, v, d)?;
                p = self.mesh.vertex(v as usize);
                f = g;
                d = dir;
                skip = Skip::Vertex(v);
                continue;
            }
            let g = self.topo.face_neighbor(f, k).ok_or(MapError::MeshBoundary { a, b })?;
            if !self.in_region(g) {
                return Err(MapError::LeftRegion { a, b });
            }
            d = self.unfold_direction(f, k, g, d)?;
            p = q;
            f = g;
            skip = Skip::Edge(a, b);
        }
        Err(MapError::WalkTooLong)
    }

    /// Rotates `d` from face `f` into neighbor `g` across edge `k` of `f`,
    /// preserving the angle to the edge.
    fn unfold_direction(&self, f: u32, k: usize, g: u32, d: Vector) -> Result<Vector, MapError> {
        let pts = self.face_points(f);
        let nf = self
            .mesh
            .face_normal(f as usize)
            .ok_or(MapError::DegenerateFace { face: f })?;
        let (pa, pb) = (pts[k], pts[(k + 1) % 3]);
        let e = (pb - pa).normalize();
        let m_f = e.cross(&nf);
        let gv = self.mesh.face(g as usize);
        let fv = self.mesh.face(f as usize);
        let c = gv
            .iter()
            .copied()
            .find(|&v| v != fv[k] && v != fv[(k + 1) % 3])
            .ok_or(MapError::DegenerateFace { face: g })?;
        let pc = self.mesh.vertex(c as usize) - pa;
        let m_g = (pc - e * pc.dot(&e))
            .try_normalize(0.0)
            .ok_or(MapError::DegenerateFace { face: g })?;
        Ok((e * d.dot(&e) + m_g * d.dot(&m_f)).normalize())
    }

    /// Faces around `v` counter-clockwise, starting at `f`. None if the fan
    /// is open (boundary vertex).
    fn fan(&self, f: u32, v: u32) -> Result<Vec<u32>, MapError> {
        let mut out = vec![f];
        let mut cur = f;
        loop {
            let face = self.mesh.face(cur as usize);
            let k = face.iter().position(|&x| x == v).expect("v is a corner");
            let b = face[(k + 2) % 3];
            let next = self
                .topo
                .directed_face(v, b)
                .ok_or(MapError::MeshBoundary { a: v.min(b), b: v.max(b) })?;
            if next == f {
                return Ok(out);
            }
            if out.len() > self.topo.faces_of_vertex(v).len() {
                return Err(MapError::MeshBoundary { a: v, b });
            }
            out.push(next);
            cur = next;
        }
    }

    /// Corner angle, first-edge unit vector and in-plane perpendicular of
    /// face `f` at its corner `v`.
    fn wedge(&self, f: u32, v: u32) -> (f64, Vector, Vector) {
        let face = self.mesh.face(f as usize);
        let k = face.iter().position(|&x| x == v).expect("v is a corner");
        let pv = self.mesh.vertex(v as usize);
        let pa = self.mesh.vertex(face[(k + 1) % 3] as usize);
        let pb = self.mesh.vertex(face[(k + 2) % 3] as usize);
        let u = (pa - pv).normalize();
        let w = ((pb - pv) - u * (pb - pv).dot(&u)).normalize();
        (self.mesh.corner_angle(f as usize, k), u, w)
    }

    /// Leaves vertex `v` at angle `target` (counter-clockwise, measured from
    /// the first edge of `f` at `v`) within the fan.
    fn leave_at_angle(&self, f: u32, v: u32, target: f64) -> Result<(u32, Vector), MapError> {
        let fan = self.fan(f, v)?;
        let total = self.angle_sums[v as usize];
        let mut rem = target.rem_euclid(total);
        for &g in &fan {
            let (alpha, u, w) = self.wedge(g, v);
            if rem <= alpha {
                let dir = u * rem.cos() + w * rem.sin();
                if !self.in_region(g) {
                    let face = self.mesh.face(g as usize);
                    return Err(MapError::LeftRegion { a: v, b: face[0].max(face[1]) });
                }
                return Ok((g, dir));
            }
            rem -= alpha;
        }
        // rounding pushed us past the last wedge
        let g = *fan.last().unwrap();
        let (alpha, u, w) = self.wedge(g, v);
        Ok((g, u * alpha.cos() + w * alpha.sin()))
    }

    /// Straightest continuation through vertex `v`: equal angle on both
    /// sides, half the total angle each.
    fn pass_vertex(&self, f: u32, v: u32, d: Vector) -> Result<(u32, Vector), MapError> {
        let (_, u, _) = self.wedge(f, v);
        let back = -d;
        let phi = crate::mesh::angle_between(&u, &back);
        self.leave_at_angle(f, v, phi + 0.5 * self.angle_sums[v as usize])
    }

    /// Starting direction at a vertex anchor: polar angle in the tangent
    /// plane, rescaled to the vertex's total angle.
    fn leave_vertex_from_tangent(&self, f: u32, v: u32, dir: Vector, n: Vector) -> Result<(u32, Vector), MapError> {
        let (_, u, _) = self.wedge(f, v);
        let u_t = (u - n * n.dot(&u)).normalize();
        let w_t = n.cross(&u_t);
        let psi = dir.dot(&w_t).atan2(dir.dot(&u_t)).rem_euclid(std::f64::consts::TAU);
        self.leave_at_angle(f, v, psi * self.angle_sums[v as usize] / std::f64::consts::TAU)
    }

    fn locate_in_face(&self, f: u32, p: &Point) -> SurfacePoint {
        let [a, b, c] = self.face_points(f);
        let n = (b - a).cross(&(c - a));
        let nn = n.norm_squared();
        let wa = (c - b).cross(&(p - b)).dot(&n) / nn;
        let wb = (a - c).cross(&(p - c)).dot(&n) / nn;
        SurfacePoint::new_clamped(f, [wa, wb, 1.0 - wa - wb])
    }

    /// Maps a closed 2D polygon: every corner via [`map_point`](Self::map_point),
    /// plus a point wherever a mapped side crosses a mesh edge.
    pub fn map_polygon(&self, frame: &TangentFrame, polygon: &[Vec2]) -> Result<Vec<SurfacePoint>, MapError> {
        let mapped: Vec<SurfacePoint> = polygon
            .iter()
            .map(|&q| self.map_point(frame, q))
            .collect::<Result<_, _>>()?;
        let mut out = Vec::new();
        for i in 0..polygon.len() {
            let j = (i + 1) % polygon.len();
            out.push(mapped[i]);
            self.subdivide(frame, (polygon[i], mapped[i]), (polygon[j], mapped[j]), 0, &mut out)?;
        }
        Ok(out)
    }

    fn subdivide(
        &self,
        frame: &TangentFrame,
        (qa, a): (Vec2, SurfacePoint),
        (qb, b): (Vec2, SurfacePoint),
        depth: usize,
        out: &mut Vec<SurfacePoint>,
    ) -> Result<(), MapError> {
        if a.face == b.face {
            return Ok(());
        }
        if let Some(k) = (0..3).find(|&k| self.topo.face_neighbor(a.face, k) == Some(b.face)) {
            out.push(self.edge_crossing(a, b, k));
            return Ok(());
        }
        if depth >= 40 {
            // The side runs through a vertex shared by both faces.
            let fa = self.mesh.face(a.face as usize);
            let fb = self.mesh.face(b.face as usize);
            if let Some(k) = fa.iter().position(|v| fb.contains(v)) {
                let mut bary = [0.0; 3];
                bary[k] = 1.0;
                out.push(SurfacePoint { face: a.face, bary });
            }
            return Ok(());
        }
        let qm = (qa + qb) * 0.5;
        let m = self.map_point(frame, qm)?;
        self.subdivide(frame, (qa, a), (qm, m), depth + 1, out)?;
        out.push(m);
        self.subdivide(frame, (qm, m), (qb, b), depth + 1, out)
    }

    /// Point where the straight segment from `a` to `b`, unfolded across
    /// edge `k` of `a.face`, meets that edge.
    fn edge_crossing(&self, a: SurfacePoint, b: SurfacePoint, k: usize) -> SurfacePoint {
        let view = self.view();
        let pa = a.position(&view);
        let pts = self.face_points(a.face);
        let nf = self.mesh.face_normal(a.face as usize).unwrap_or(Vector::z());
        let (e0, e1) = (pts[k], pts[(k + 1) % 3]);
        let e = (e1 - e0).normalize();
        let m_f = e.cross(&nf);
        // unfold b into the plane of a.face
        let pb = b.position(&view);
        let rel = pb - e0;
        let along = rel.dot(&e);
        let off = (rel - e * along).norm();
        let pb_unfolded = e0 + e * along + m_f * off;
        let da = (pa - e0).dot(&m_f);
        let db = (pb_unfolded - e0).dot(&m_f);
        let s = if (db - da).abs() > 0.0 { (-da / (db - da)).clamp(0.0, 1.0) } else { 0.5 };
        let x = pa + (pb_unfolded - pa) * s;
        let t = ((x - e0).dot(&e) / (e1 - e0).norm()).clamp(0.0, 1.0);
        let mut bary = [0.0; 3];
        bary[k] = 1.0 - t;
        bary[(k + 1) % 3] = t;
        SurfacePoint { face: a.face, bary }
    }

    /// Frame at `anchor` with no rotation and unit scale.
    pub fn base_frame(&self, anchor: SurfacePoint) -> Result<TangentFrame, MapError> {
        self.local_frame(&Placement::new(anchor, 0.0, 1.0)?)
    }

    /// 2D offset `q` in `frame` with `map_point(frame, q)` landing on
    /// `target`. Starts from the unfolded-chart coordinate and corrects it
    /// by walking; exact on developable patches, close elsewhere.
    pub fn log_point(&self, frame: &TangentFrame, target: &SurfacePoint) -> Option<Vec2> {
        let frame = frame.unscaled();
        let chart = self.chart_towards(&frame, target.face, 20_000)?;
        let goal = chart.log(target)?;
        let goal_pos = self.position(target);
        let mut q = goal;
        let mut best = (f64::INFINITY, q);
        for _ in 0..30 {
            let Ok(p) = self.map_point(&frame, q) else { break };
            let err = (self.position(&p) - goal_pos).norm();
            if err < best.0 {
                best = (err, q);
            }
            if err < 1e-12 {
                break;
            }
            let Some(here) = chart.log(&p) else { break };
            q += goal - here;
        }
        Some(best.1)
    }

    /// Chart around a frame, grown until it holds `target` (or `max_faces`).
    pub fn chart_towards(&self, frame: &TangentFrame, target: u32, max_faces: usize) -> Option<UnfoldedChart> {
        let view = self.view();
        let nf = self.mesh.face_normal(frame.anchor.face as usize)?;
        let x = Rotation3::rotation_between(&frame.n, &nf)
            .map(|r| r * frame.e1)
            .unwrap_or(frame.e1);
        let mut chart = UnfoldedChart::new(&view, frame.anchor.face, frame.origin, x)?;
        chart.grow_to(&view, target, max_faces).then_some(chart)
    }
}

#[derive(Debug, Clone, Copy)]
enum Skip {
    None,
    Edge(u32, u32),
    Vertex(u32),
}

impl Skip {
    fn excludes(self, a: u32, b: u32) -> bool {
        match self {
            Skip::None => false,
            Skip::Edge(x, y) => (a == x && b == y) || (a == y && b == x),
            Skip::Vertex(v) => a == v || b == v,
        }
    }
}

/// Rotation that takes the frame normal onto `to`, used to carry tangent
/// directions between nearby planes.
pub fn align_normals(from: &Vector, to: &Vector) -> Rotation3<f64> {
    Rotation3::rotation_between(from, to).unwrap_or_else(|| {
        let axis = Unit::new_normalize(from.cross(&Vector::x()).try_normalize(1e-9).unwrap_or(Vector::y()));
        Rotation3::from_axis_angle(&axis, std::f64::consts::PI)
    })
}

/// Convenience wrapper: frame for `placement` on `mesh`.
pub fn local_frame(mesh: &TriangleMesh, placement: &Placement) -> Result<TangentFrame, MapError> {
    SurfaceMap::new(mesh)?.local_frame(placement)
}

/// Convenience wrapper around [`SurfaceMap::map_point`].
pub fn map_point(mesh: &TriangleMesh, frame: &TangentFrame, p: Vec2) -> Result<SurfacePoint, MapError> {
    SurfaceMap::new(mesh)?.map_point(frame, p)
}

/// Convenience wrapper around [`SurfaceMap::map_polygon`].
pub fn map_polygon(mesh: &TriangleMesh, frame: &TangentFrame, polygon: &[Vec2]) -> Result<Vec<SurfacePoint>, MapError> {
    SurfaceMap::new(mesh)?.map_polygon(frame, polygon)
}
