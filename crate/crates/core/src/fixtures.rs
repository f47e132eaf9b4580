//! Procedural meshes: the primitive surfaces used by tests, benches, the
//! acceptance suite and the CLI's `fixture` command.

use crate::mesh::{Point, TriangleMesh};
use std::collections::HashMap;
use std::f64::consts::PI;

struct Builder {
    index: HashMap<[u64; 3], u32>,
    vertices: Vec<Point>,
    faces: Vec<[u32; 3]>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            index: HashMap::new(),
            vertices: Vec::new(),
            faces: Vec::new(),
        }
    }

    fn vertex(&mut self, p: Point) -> u32 {
        let key = [p.x + 0.0, p.y + 0.0, p.z + 0.0].map(f64::to_bits);
        let next = self.vertices.len() as u32;
        *self.index.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            next
        })
    }

    fn push_unwelded(&mut self, p: Point) -> u32 {
        self.vertices.push(p);
        (self.vertices.len() - 1) as u32
    }

    fn tri(&mut self, a: u32, b: u32, c: u32) {
        self.faces.push([a, b, c]);
    }

    fn quad(&mut self, a: u32, b: u32, c: u32, d: u32) {
        self.tri(a, b, c);
        self.tri(a, c, d);
    }

    fn build(self) -> TriangleMesh {
        TriangleMesh::new(self.vertices, self.faces).expect("fixture mesh is valid")
    }
}

/// The 8-vertex, 12-triangle unit cube `[0,1]^3`, outward oriented.
pub fn unit_cube() -> TriangleMesh {
    box_mesh([1.0, 1.0, 1.0], [1, 1, 1])
}

/// Closed axis-aligned box `[0,X]x[0,Y]x[0,Z]` with each face gridded.
pub fn box_mesh(size: [f64; 3], divisions: [usize; 3]) -> TriangleMesh {
    let mut b = Builder::new();
    let pos = |g: [usize; 3]| {
        Point::new(
            size[0] * g[0] as f64 / divisions[0] as f64,
            size[1] * g[1] as f64 / divisions[1] as f64,
            size[2] * g[2] as f64 / divisions[2] as f64,
        )
    };
    // (fixed axis, fixed at max?, u axis, v axis) with u x v outward
    let sides: [(usize, bool, usize, usize); 6] = [
        (2, false, 1, 0),
        (2, true, 0, 1),
        (1, false, 0, 2),
        (1, true, 2, 0),
        (0, false, 2, 1),
        (0, true, 1, 2),
    ];
    for (fixed, at_max, ua, va) in sides {
        let (nu, nv) = (divisions[ua], divisions[va]);
        let mut grid = vec![vec![0u32; nv + 1]; nu + 1];
        for (i, col) in grid.iter_mut().enumerate() {
            for (j, slot) in col.iter_mut().enumerate() {
                let mut g = [0usize; 3];
                g[fixed] = if at_max { divisions[fixed] } else { 0 };
                g[ua] = i;
                g[va] = j;
                *slot = b.vertex(pos(g));
            }
        }
        for i in 0..nu {
            for j in 0..nv {
                b.quad(grid[i][j], grid[i + 1][j], grid[i + 1][j + 1], grid[i][j + 1]);
            }
        }
    }
    b.build()
}

/// A primitive for the grid study: where the pattern starts and, when the
/// textured surface is only part of the solid, its faces.
#[derive(Debug, Clone)]
pub struct StudySurface {
    pub name: &'static str,
    pub mesh: TriangleMesh,
    pub cursor: Point,
    pub region: Option<Vec<u32>>,
}

/// Flat plate, cylinder side, sphere and cone side, each with room for a
/// 3x3 grid of 5 mm steps starting at its cursor.
pub fn study_surfaces() -> Vec<StudySurface> {
    let cylinder = cylinder(15.0, 30.0, 96, 24, true);
    let cone = cone(20.0, 30.0, 96, 30);
    vec![
        StudySurface {
            name: "plate",
            mesh: box_mesh([30.0, 30.0, 3.0], [6, 6, 1]),
            cursor: Point::new(8.0, 8.0, 3.0),
            region: None,
        },
        StudySurface {
            name: "cylinder",
            region: Some(faces_off_planes(&cylinder, &[0.0, 30.0])),
            mesh: cylinder,
            cursor: Point::new(15.0, 0.0, 8.0),
        },
        StudySurface {
            name: "sphere",
            mesh: icosphere(15.0, 4),
            cursor: Point::new(0.0, 0.0, 15.0),
            region: None,
        },
        StudySurface {
            name: "cone",
            region: Some(faces_off_planes(&cone, &[0.0])),
            mesh: cone,
            cursor: Point::new(20.0 * (1.0 - 14.0 / 30.0), 0.0, 14.0),
        },
    ]
}

/// Faces without all three corners on one of the planes `z = c`.
fn faces_off_planes(mesh: &TriangleMesh, planes: &[f64]) -> Vec<u32> {
    (0..mesh.num_faces() as u32)
        .filter(|&f| {
            let pts = mesh.face_points(f as usize);
            !planes.iter().any(|c| pts.iter().all(|p| (p.z - c).abs() < 1e-9))
        })
        .collect()
}

/// Open flat grid in the z=0 plane covering `[0,w]x[0,h]`.
pub fn grid_plane(w: f64, h: f64, nx: usize, ny: usize) -> TriangleMesh {
    let mut b = Builder::new();
    let mut ids = vec![vec![0u32; ny + 1]; nx + 1];
    for (i, col) in ids.iter_mut().enumerate() {
        for (j, slot) in col.iter_mut().enumerate() {
            *slot = b.vertex(Point::new(
                w * i as f64 / nx as f64,
                h * j as f64 / ny as f64,
                0.0,
            ));
        }
    }
    for i in 0..nx {
        for j in 0..ny {
            b.quad(ids[i][j], ids[i + 1][j], ids[i + 1][j + 1], ids[i][j + 1]);
        }
    }
    b.build()
}

/// Straight strip of `n` unit squares along +x (two vertex rows, y=0 and y=1).
/// Vertex `2i` is `(i,0,0)` and `2i+1` is `(i,1,0)`.
pub fn strip(n: usize) -> TriangleMesh {
    let mut b = Builder::new();
    for i in 0..=n {
        b.push_unwelded(Point::new(i as f64, 0.0, 0.0));
        b.push_unwelded(Point::new(i as f64, 1.0, 0.0));
    }
    for i in 0..n as u32 {
        b.quad(2 * i, 2 * i + 2, 2 * i + 3, 2 * i + 1);
    }
    b.build()
}

/// Cylinder around the z axis from `z=0` to `z=height`. When `capped`, both
/// ends are closed by triangle fans around a center vertex.
pub fn cylinder(radius: f64, height: f64, segments: usize, rings: usize, capped: bool) -> TriangleMesh {
    let mut b = Builder::new();
    let mut ring_ids = Vec::with_capacity(rings + 1);
    for j in 0..=rings {
        let z = height * j as f64 / rings as f64;
        let ids: Vec<u32> = (0..segments)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / segments as f64;
                b.push_unwelded(Point::new(radius * t.cos(), radius * t.sin(), z))
            })
            .collect();
        ring_ids.push(ids);
    }
    for j in 0..rings {
        for k in 0..segments {
            let k1 = (k + 1) % segments;
            b.quad(
                ring_ids[j][k],
                ring_ids[j][k1],
                ring_ids[j + 1][k1],
                ring_ids[j + 1][k],
            );
        }
    }
    if capped {
        let bottom = b.push_unwelded(Point::new(0.0, 0.0, 0.0));
        let top = b.push_unwelded(Point::new(0.0, 0.0, height));
        for k in 0..segments {
            let k1 = (k + 1) % segments;
            b.tri(bottom, ring_ids[0][k1], ring_ids[0][k]);
            b.tri(top, ring_ids[rings][k], ring_ids[rings][k1]);
        }
    }
    b.build()
}

/// Closed cone: base disk at z=0 (radius `radius`), apex at `(0,0,height)`.
pub fn cone(radius: f64, height: f64, segments: usize, rings: usize) -> TriangleMesh {
    let mut b = Builder::new();
    let mut ring_ids = Vec::with_capacity(rings);
    for j in 0..rings {
        let s = j as f64 / rings as f64;
        let r = radius * (1.0 - s);
        let ids: Vec<u32> = (0..segments)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / segments as f64;
                b.push_unwelded(Point::new(r * t.cos(), r * t.sin(), height * s))
            })
            .collect();
        ring_ids.push(ids);
    }
    let apex = b.push_unwelded(Point::new(0.0, 0.0, height));
    let center = b.push_unwelded(Point::new(0.0, 0.0, 0.0));
    for j in 0..rings - 1 {
        for k in 0..segments {
            let k1 = (k + 1) % segments;
            b.quad(
                ring_ids[j][k],
                ring_ids[j][k1],
                ring_ids[j + 1][k1],
                ring_ids[j + 1][k],
            );
        }
    }
    for k in 0..segments {
        let k1 = (k + 1) % segments;
        b.tri(ring_ids[rings - 1][k], ring_ids[rings - 1][k1], apex);
        b.tri(center, ring_ids[0][k1], ring_ids[0][k]);
    }
    b.build()
}

/// Open cone folded from a half-disk of radius `slant`: a fan of `n`
/// isosceles triangles whose apex angles are each exactly `π/n`.
/// Vertex 0 is the apex.
pub fn half_disk_cone(slant: f64, n: usize) -> TriangleMesh {
    let mut b = Builder::new();
    let half = PI / (2.0 * n as f64);
    let rho = slant / (2.0 * half.cos());
    let height = (slant * slant - rho * rho).sqrt();
    let apex = b.push_unwelded(Point::new(0.0, 0.0, height));
    let rim: Vec<u32> = (0..n)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / n as f64;
            b.push_unwelded(Point::new(rho * t.cos(), rho * t.sin(), 0.0))
        })
        .collect();
    for k in 0..n {
        b.tri(apex, rim[(k + 1) % n], rim[k]);
    }
    b.build()
}

/// Geodesic sphere from a subdivided icosahedron: `20 * 4^level` faces.
pub fn icosphere(radius: f64, level: usize) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<[f64; 3]> = vec![
        [-1., t, 0.],
        [1., t, 0.],
        [-1., -t, 0.],
        [1., -t, 0.],
        [0., -1., t],
        [0., 1., t],
        [0., -1., -t],
        [0., 1., -t],
        [t, 0., -1.],
        [t, 0., 1.],
        [-t, 0., -1.],
        [-t, 0., 1.],
    ];
    let normalize = |p: [f64; 3]| {
        let l = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / l, p[1] / l, p[2] / l]
    };
    for v in verts.iter_mut() {
        *v = normalize(*v);
    }
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut mid: HashMap<(u32, u32), u32> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        let mut midpoint = |a: u32, b: u32, verts: &mut Vec<[f64; 3]>| {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                let (p, q) = (verts[a as usize], verts[b as usize]);
                verts.push(normalize([
                    (p[0] + q[0]) * 0.5,
                    (p[1] + q[1]) * 0.5,
                    (p[2] + q[2]) * 0.5,
                ]));
                (verts.len() - 1) as u32
            })
        };
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let vertices = verts
        .into_iter()
        .map(|p| Point::new(p[0] * radius, p[1] * radius, p[2] * radius))
        .collect();
    TriangleMesh::new(vertices, faces).expect("icosphere is valid")
}

/// Closed surface of revolution about the z axis. `profile` lists `(r, z)`
/// samples with `r > 0`, ordered by increasing `z`; poles are added at
/// `z_bottom` and `z_top`.
pub fn revolve(profile: &[(f64, f64)], z_bottom: f64, z_top: f64, segments: usize) -> TriangleMesh {
    let mut b = Builder::new();
    let bottom = b.push_unwelded(Point::new(0.0, 0.0, z_bottom));
    let rings: Vec<Vec<u32>> = profile
        .iter()
        .map(|&(r, z)| {
            (0..segments)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / segments as f64;
                    b.push_unwelded(Point::new(r * t.cos(), r * t.sin(), z))
                })
                .collect()
        })
        .collect();
    let top = b.push_unwelded(Point::new(0.0, 0.0, z_top));
    let last = rings.len() - 1;
    for k in 0..segments {
        let k1 = (k + 1) % segments;
        b.tri(bottom, rings[0][k1], rings[0][k]);
        b.tri(top, rings[last][k], rings[last][k1]);
        for j in 0..last {
            b.quad(rings[j][k], rings[j][k1], rings[j + 1][k1], rings[j + 1][k]);
        }
    }
    b.build()
}

/// Two spherical bulbs (radius `bulb`, centers at `z = ±separation/2`)
/// joined by a cylindrical neck of radius `neck`.
pub fn dumbbell(bulb: f64, neck: f64, separation: f64, rings: usize, segments: usize) -> TriangleMesh {
    let c = separation / 2.0;
    let (zb, zt) = (-c - bulb, c + bulb);
    let radius = |z: f64| {
        let s1 = (bulb * bulb - (z + c) * (z + c)).max(0.0).sqrt();
        let s2 = (bulb * bulb - (z - c) * (z - c)).max(0.0).sqrt();
        let n = if z.abs() <= c { neck } else { 0.0 };
        s1.max(s2).max(n)
    };
    // sample by angle on the bulbs so the poles are not degenerate
    let mut profile = Vec::new();
    let per = rings / 3;
    for i in 1..=per {
        let phi = PI * i as f64 / (per as f64 + 1.0) * 0.9;
        let z = -c - bulb * phi.cos();
        profile.push((radius(z), z));
    }
    let z0 = profile.last().unwrap().1;
    let z1 = -z0;
    for i in 1..per {
        let z = z0 + (z1 - z0) * i as f64 / per as f64;
        profile.push((radius(z), z));
    }
    for i in (1..=per).rev() {
        let phi = PI * i as f64 / (per as f64 + 1.0) * 0.9;
        let z = c + bulb * phi.cos();
        profile.push((radius(z), z));
    }
    revolve(&profile, zb, zt, segments)
}

/// Torus whose tube radius oscillates: fat at `u = 0, π` and thin (the two
/// "necks") at `u = π/2, 3π/2`.
pub fn necked_torus(major: f64, tube: f64, wobble: f64, nu: usize, nv: usize) -> TriangleMesh {
    let mut b = Builder::new();
    let mut ids = vec![vec![0u32; nv]; nu];
    for (i, row) in ids.iter_mut().enumerate() {
        let u = 2.0 * PI * i as f64 / nu as f64;
        let r = tube + wobble * (2.0 * u).cos();
        for (j, slot) in row.iter_mut().enumerate() {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let rr = major + r * v.cos();
            *slot = b.push_unwelded(Point::new(rr * u.cos(), rr * u.sin(), r * v.sin()));
        }
    }
    for i in 0..nu {
        for j in 0..nv {
            let (i1, j1) = ((i + 1) % nu, (j + 1) % nv);
            b.quad(ids[i][j], ids[i1][j], ids[i1][j1], ids[i][j1]);
        }
    }
    b.build()
}

/// Two triangles meeting at the ridge `(0,0,0)-(0,1,0)` with the given
/// dihedral fold. Vertices: 0,1 ridge; 2 on the -x wing; 3 on the +x wing.
pub fn tent(wing: f64, slope: f64) -> TriangleMesh {
    let vertices = vec![
        Point::new(0.0, 0.0, 0.0),
        Point::new(0.0, wing, 0.0),
        Point::new(-wing * slope.cos(), wing * 0.5, -wing * slope.sin()),
        Point::new(wing * slope.cos(), wing * 0.5, -wing * slope.sin()),
    ];
    TriangleMesh::new(vertices, vec![[0, 1, 2], [0, 3, 1]]).expect("tent is valid")
}

/// Icosphere with a smooth radial wobble, coordinates rounded to `f32` so
/// that STL round trips are exact.
pub fn blob(radius: f64, level: usize) -> TriangleMesh {
    let base = icosphere(1.0, level);
    let vertices = base
        .vertices()
        .iter()
        .map(|p| {
            let s = 1.0 + 0.12 * (3.0 * p.x).sin() * (2.0 * p.y).cos() + 0.08 * (4.0 * p.z).sin();
            let q = p.coords * radius * s;
            Point::new(q.x as f32 as f64, q.y as f32 as f64, q.z as f32 as f64)
        })
        .collect();
    TriangleMesh::new(vertices, base.faces().to_vec()).expect("blob is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{check_watertight, signed_volume};

    #[test]
    fn closed_fixtures_are_watertight_and_outward() {
        let meshes = [
            box_mesh([10.0, 10.0, 1.0], [4, 4, 1]),
            cylinder(5.0, 20.0, 16, 8, true),
            cone(10.0, 20.0, 24, 6),
            icosphere(10.0, 2),
            dumbbell(5.0, 1.5, 20.0, 30, 16),
            necked_torus(10.0, 3.0, 1.8, 48, 16),
            blob(10.0, 2),
        ];
        for m in &meshes {
            let r = check_watertight(m);
            assert!(r.is_watertight(), "{r}");
            assert!(signed_volume(m).unwrap() > 0.0);
        }
    }

    #[test]
    fn box_volume_and_counts() {
        let m = box_mesh([10.0, 10.0, 1.0], [2, 2, 1]);
        assert!((signed_volume(&m).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(unit_cube().num_vertices(), 8);
        assert_eq!(unit_cube().num_faces(), 12);
    }

    #[test]
    fn icosphere_volume_close_to_analytic() {
        let m = icosphere(10.0, 4);
        assert_eq!(m.num_faces(), 5120);
        let exact = 4.0 / 3.0 * PI * 1000.0;
        let v = signed_volume(&m).unwrap();
        assert!((v - exact).abs() / exact < 0.01, "{v} vs {exact}");
    }
}
