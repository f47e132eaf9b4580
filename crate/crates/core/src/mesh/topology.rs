use super::TriangleMesh;
use std::collections::HashMap;

/// Adjacency tables derived from a [`TriangleMesh`].
#[derive(Debug, Clone)]
pub struct Topology {
    directed: HashMap<(u32, u32), u32>,
    edge_faces: HashMap<(u32, u32), Vec<u32>>,
    edges: Vec<(u32, u32)>,
    vertex_faces: Vec<Vec<u32>>,
    neighbors: Vec<Vec<u32>>,
    face_neighbors: Vec<[Option<u32>; 3]>,
    boundary_vertex: Vec<bool>,
}

impl Topology {
    pub fn build(mesh: &TriangleMesh) -> Topology {
        let nv = mesh.num_vertices();
        let mut directed = HashMap::with_capacity(mesh.num_faces() * 3);
        let mut edge_faces: HashMap<(u32, u32), Vec<u32>> = HashMap::new();
        let mut vertex_faces = vec![Vec::new(); nv];
        let mut neighbors = vec![Vec::new(); nv];
        for (fi, f) in mesh.faces().iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                directed.entry((a, b)).or_insert(fi as u32);
                edge_faces.entry(undirected(a, b)).or_default().push(fi as u32);
                vertex_faces[a as usize].push(fi as u32);
                neighbors[a as usize].push(b);
                neighbors[b as usize].push(a);
            }
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        let mut edges: Vec<_> = edge_faces.keys().copied().collect();
        edges.sort_unstable();
        let mut boundary_vertex = vec![false; nv];
        for (&(a, b), fs) in &edge_faces {
            if fs.len() == 1 {
                boundary_vertex[a as usize] = true;
                boundary_vertex[b as usize] = true;
            }
        }
        let face_neighbors = mesh
            .faces()
            .iter()
            .enumerate()
            .map(|(fi, f)| {
                let mut out = [None; 3];
                for (k, slot) in out.iter_mut().enumerate() {
                    let (a, b) = (f[k], f[(k + 1) % 3]);
                    let fs = &edge_faces[&undirected(a, b)];
                    if fs.len() == 2 {
                        *slot = fs.iter().copied().find(|&g| g as usize != fi);
                    }
                }
                out
            })
            .collect();
        Topology {
            directed,
            edge_faces,
            edges,
            vertex_faces,
            neighbors,
            face_neighbors,
            boundary_vertex,
        }
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Undirected edges `(min, max)` in sorted order.
    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn faces_of_edge(&self, a: u32, b: u32) -> &[u32] {
        self.edge_faces
            .get(&undirected(a, b))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// Face that contains the directed edge `a -> b`.
    pub fn directed_face(&self, a: u32, b: u32) -> Option<u32> {
        self.directed.get(&(a, b)).copied()
    }

    pub fn vertex_faces(&self) -> &[Vec<u32>] {
        &self.vertex_faces
    }

    pub fn faces_of_vertex(&self, v: u32) -> &[u32] {
        &self.vertex_faces[v as usize]
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.neighbors[v as usize]
    }

    /// Face across edge `k` (from corner `k` to corner `k+1`) of face `f`,
    /// when that edge is shared by exactly two faces.
    pub fn face_neighbor(&self, f: u32, k: usize) -> Option<u32> {
        self.face_neighbors[f as usize][k]
    }

    pub fn face_neighbors(&self, f: u32) -> [Option<u32>; 3] {
        self.face_neighbors[f as usize]
    }

    pub fn is_boundary_vertex(&self, v: u32) -> bool {
        self.boundary_vertex[v as usize]
    }

    /// Connected components of the face-adjacency graph (manifold edges only),
    /// each sorted, listed in order of their smallest face.
    pub fn face_components(&self) -> Vec<Vec<u32>> {
        let nf = self.face_neighbors.len();
        let mut comp = vec![usize::MAX; nf];
        let mut out = Vec::new();
        for start in 0..nf {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start as u32];
            comp[start] = id;
            let mut i = 0;
            while i < members.len() {
                let f = members[i];
                i += 1;
                for g in self.face_neighbors[f as usize].into_iter().flatten() {
                    if comp[g as usize] == usize::MAX {
                        comp[g as usize] = id;
                        members.push(g);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }
}

pub(crate) fn undirected(a: u32, b: u32) -> (u32, u32) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}
