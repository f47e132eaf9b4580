use super::{MeshView, SurfacePoint};
use crate::mesh::{Point, Vector};
use nalgebra::Vector2;
use std::collections::{HashMap, HashSet};

pub type Vec2 = Vector2<f64>;

/// Faces unfolded isometrically, one by one, into a plane around an anchor.
///
/// Each vertex gets the coordinate of the first face that placed it, so the
/// chart is a planar triangulation even where the surface has curvature;
/// there the later faces absorb the mismatch. Faces whose unfolded copy
/// would be inverted are left out.
#[derive(Debug, Clone)]
pub struct UnfoldedChart {
    origin: Point,
    faces: Vec<u32>,
    face_index: HashMap<u32, usize>,
    face_verts: Vec<[u32; 3]>,
    coords: HashMap<u32, Vec2>,
    frontier: Vec<u32>,
    rejected: HashSet<u32>,
}

fn cross2(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Barycentric coordinates of `q` in the 2D triangle `t`.
pub fn barycentric2(q: Vec2, t: [Vec2; 3]) -> Option<[f64; 3]> {
    let area = cross2(t[1] - t[0], t[2] - t[0]);
    if area.abs() < f64::MIN_POSITIVE {
        return None;
    }
    let b1 = cross2(q - t[0], t[2] - t[0]) / area;
    let b2 = cross2(t[1] - t[0], q - t[0]) / area;
    Some([1.0 - b1 - b2, b1, b2])
}

impl UnfoldedChart {
    /// Starts a chart on `face` with `origin` (a point of that face) at 2D
    /// `(0, 0)` and the in-plane direction `x_dir` along +x.
    pub fn new<M: MeshView + ?Sized>(mesh: &M, face: u32, origin: Point, x_dir: Vector) -> Option<Self> {
        let verts = mesh.face_vertices(face);
        let pts = verts.map(|v| mesh.position(v));
        let n = (pts[1] - pts[0]).cross(&(pts[2] - pts[0]));
        let n = n.try_normalize(0.0)?;
        let x = (x_dir - n * n.dot(&x_dir)).try_normalize(1e-300)?;
        let y = n.cross(&x);
        let mut coords = HashMap::new();
        for (v, p) in verts.iter().zip(pts) {
            let d = p - origin;
            coords.insert(*v, Vec2::new(d.dot(&x), d.dot(&y)));
        }
        let mut face_index = HashMap::new();
        face_index.insert(face, 0);
        Some(UnfoldedChart {
            origin,
            faces: vec![face],
            face_index,
            face_verts: vec![verts],
            coords,
            frontier: vec![face],
            rejected: HashSet::new(),
        })
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    /// Chart faces in the order they were added.
    pub fn faces(&self) -> &[u32] {
        &self.faces
    }

    pub fn contains_face(&self, f: u32) -> bool {
        self.face_index.contains_key(&f)
    }

    pub fn coord(&self, v: u32) -> Option<Vec2> {
        self.coords.get(&v).copied()
    }

    /// 2D corners of chart face number `i` (in [`faces`](Self::faces) order).
    pub fn triangle(&self, i: usize) -> ([u32; 3], [Vec2; 3]) {
        let verts = self.face_verts[i];
        (verts, verts.map(|v| self.coords[&v]))
    }

    /// Adds one breadth-first ring of neighbors accepted by `accept`.
    /// Returns false when nothing was added.
    pub fn grow_layer<M: MeshView + ?Sized>(&mut self, mesh: &M, mut accept: impl FnMut(u32) -> bool) -> bool {
        let mut next = Vec::new();
        let frontier = std::mem::take(&mut self.frontier);
        for f in frontier {
            for k in 0..3 {
                let Some(g) = mesh.neighbor_across(f, k) else { continue };
                if self.face_index.contains_key(&g) || self.rejected.contains(&g) {
                    continue;
                }
                if !accept(g) {
                    self.rejected.insert(g);
                    continue;
                }
                if self.unfold(mesh, f, k, g) {
                    next.push(g);
                } else {
                    self.rejected.insert(g);
                }
            }
        }
        let grew = !next.is_empty();
        self.frontier = next;
        grew
    }

    /// Places `g`, the neighbor of chart face `f` across its edge `k`.
    fn unfold<M: MeshView + ?Sized>(&mut self, mesh: &M, f: u32, k: usize, g: u32) -> bool {
        let fv = self.face_verts[self.face_index[&f]];
        let (u, w) = (fv[k], fv[(k + 1) % 3]);
        let gv = mesh.face_vertices(g);
        let Some(c) = gv.iter().copied().find(|&v| v != u && v != w) else {
            return false;
        };
        if !self.coords.contains_key(&c) {
            let (pu, pw, pc) = (mesh.position(u), mesh.position(w), mesh.position(c));
            let e = pw - pu;
            let len = e.norm();
            if len == 0.0 {
                return false;
            }
            let e_hat = e / len;
            let s = (pc - pu).dot(&e_hat);
            let h = ((pc - pu) - e_hat * s).norm();
            let (cu, cw) = (self.coords[&u], self.coords[&w]);
            let d2 = cw - cu;
            let d2n = d2.norm();
            if d2n == 0.0 {
                return false;
            }
            let ex = d2 / d2n;
            // g holds the edge as w -> u, so its third corner is left of w -> u
            let left = Vec2::new(ex.y, -ex.x);
            let scale = d2n / len;
            self.coords.insert(c, cu + ex * (s * scale) + left * (h * scale));
        }
        let tri = gv.map(|v| self.coords[&v]);
        if cross2(tri[1] - tri[0], tri[2] - tri[0]) <= 0.0 {
            return false;
        }
        self.face_index.insert(g, self.faces.len());
        self.faces.push(g);
        self.face_verts.push(gv);
        true
    }

    /// Grows until `face` is part of the chart or nothing more can be added.
    pub fn grow_to<M: MeshView + ?Sized>(&mut self, mesh: &M, face: u32, max_faces: usize) -> bool {
        while !self.contains_face(face) && self.faces.len() < max_faces {
            if !self.grow_layer(mesh, |_| true) {
                break;
            }
        }
        self.contains_face(face)
    }

    /// Chart face containing `q` (with a small tolerance), as a surface point.
    pub fn lift(&self, q: Vec2) -> Option<SurfacePoint> {
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for i in 0..self.faces.len() {
            let (_, tri) = self.triangle(i);
            let Some(b) = barycentric2(q, tri) else { continue };
            let worst = b[0].min(b[1]).min(b[2]);
            if worst >= -1e-9 && best.is_none_or(|(w, _, _)| worst > w) {
                best = Some((worst, i, b));
            }
        }
        best.map(|(_, i, b)| SurfacePoint::new_clamped(self.faces[i], b))
    }

    /// 2D coordinate of a surface point lying on a chart face.
    pub fn log(&self, p: &SurfacePoint) -> Option<Vec2> {
        let i = *self.face_index.get(&p.face)?;
        let (_, tri) = self.triangle(i);
        Some(tri[0] * p.bary[0] + tri[1] * p.bary[1] + tri[2] * p.bary[2])
    }

    /// Undirected chart edges with exactly one incident chart face, each
    /// given in the direction its chart face traverses it.
    pub fn boundary_edges<M: MeshView + ?Sized>(&self, mesh: &M) -> Vec<(u32, u32, Option<u32>)> {
        let mut out = Vec::new();
        for (i, &f) in self.faces.iter().enumerate() {
            let verts = self.face_verts[i];
            for k in 0..3 {
                let outside = mesh.neighbor_across(f, k);
                if outside.is_none_or(|g| !self.contains_face(g)) {
                    out.push((verts[k], verts[(k + 1) % 3], outside));
                }
            }
        }
        out
    }
}
