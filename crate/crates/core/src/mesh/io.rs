//! STL (binary and ASCII) and OBJ reading/writing.

use super::{MeshError, Point, TriangleMesh, Vector};
use std::collections::HashMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MeshFormat {
    StlBinary,
    StlAscii,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from a file extension, sniffing STL payloads to
    /// tell ASCII from binary.
    pub fn detect(path: &std::path::Path, bytes: &[u8]) -> Option<MeshFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(MeshFormat::Obj),
            "stl" => Some(if looks_like_binary_stl(bytes) {
                MeshFormat::StlBinary
            } else {
                MeshFormat::StlAscii
            }),
            _ => None,
        }
    }
}

fn looks_like_binary_stl(bytes: &[u8]) -> bool {
    if bytes.len() >= 84 {
        let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
        if 84 + 50 * count == bytes.len() {
            return true;
        }
    }
    !bytes.trim_ascii_start().starts_with(b"solid")
}

pub fn load_mesh(bytes: &[u8], format: MeshFormat) -> Result<TriangleMesh, MeshError> {
    let mesh = match format {
        MeshFormat::StlBinary => load_stl_binary(bytes)?,
        MeshFormat::StlAscii => load_stl_ascii(bytes)?,
        MeshFormat::Obj => load_obj(bytes)?,
    };
    if mesh.is_empty() {
        return Err(MeshError::Empty);
    }
    Ok(mesh)
}

pub fn save_mesh(mesh: &TriangleMesh, format: MeshFormat) -> Result<Vec<u8>, MeshError> {
    save_impl(mesh, format, false)
}

/// Like [`save_mesh`], but OBJ output also carries `vn` lines when the mesh
/// has normals attached.
pub fn save_mesh_with_normals(
    mesh: &TriangleMesh,
    format: MeshFormat,
) -> Result<Vec<u8>, MeshError> {
    save_impl(mesh, format, true)
}

fn save_impl(mesh: &TriangleMesh, format: MeshFormat, normals: bool) -> Result<Vec<u8>, MeshError> {
    if mesh.is_empty() {
        return Err(MeshError::Empty);
    }
    Ok(match format {
        MeshFormat::StlBinary => save_stl_binary(mesh),
        MeshFormat::StlAscii => save_stl_ascii(mesh).into_bytes(),
        MeshFormat::Obj => save_obj(mesh, normals).into_bytes(),
    })
}

/// Welds vertices by exact bit-equality of their coordinates.
struct Welder {
    index: HashMap<[u64; 3], u32>,
    vertices: Vec<Point>,
}

impl Welder {
    fn new() -> Self {
        Welder {
            index: HashMap::new(),
            vertices: Vec::new(),
        }
    }

    fn add(&mut self, p: Point) -> u32 {
        // normalize -0.0 so it welds with 0.0
        let key = [p.x + 0.0, p.y + 0.0, p.z + 0.0].map(f64::to_bits);
        let next = self.vertices.len() as u32;
        *self.index.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            next
        })
    }
}

fn finish(welder: Welder, tris: Vec<([u32; 3], usize)>) -> Result<TriangleMesh, MeshError> {
    for (f, (tri, offset)) in tris.iter().enumerate() {
        if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
            return Err(MeshError::Parse {
                offset: *offset,
                message: format!("facet {f} collapses to fewer than three distinct vertices"),
            });
        }
    }
    TriangleMesh::new(welder.vertices, tris.into_iter().map(|(t, _)| t).collect())
}

fn load_stl_binary(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    if bytes.len() < 84 {
        return Err(MeshError::Parse {
            offset: bytes.len(),
            message: "binary STL shorter than its 84-byte header".into(),
        });
    }
    let count = u32::from_le_bytes(bytes[80..84].try_into().unwrap()) as usize;
    let expected = 84usize.saturating_add(count.saturating_mul(50));
    if expected != bytes.len() {
        return Err(MeshError::Parse {
            offset: 80,
            message: format!(
                "facet count {count} implies {expected} bytes but the payload has {}",
                bytes.len()
            ),
        });
    }
    let mut welder = Welder::new();
    let mut tris = Vec::with_capacity(count);
    for i in 0..count {
        let base = 84 + 50 * i;
        let mut tri = [0u32; 3];
        for (k, slot) in tri.iter_mut().enumerate() {
            let off = base + 12 + 12 * k;
            let c = |j: usize| {
                f32::from_le_bytes(bytes[off + 4 * j..off + 4 * j + 4].try_into().unwrap())
            };
            let (x, y, z) = (c(0), c(1), c(2));
            if !(x.is_finite() && y.is_finite() && z.is_finite()) {
                return Err(MeshError::Parse {
                    offset: off,
                    message: "non-finite vertex coordinate".into(),
                });
            }
            *slot = welder.add(Point::new(x as f64, y as f64, z as f64));
        }
        tris.push((tri, base));
    }
    finish(welder, tris)
}

fn load_stl_ascii(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|e| MeshError::Parse {
        offset: e.valid_up_to(),
        message: "ASCII STL is not valid UTF-8".into(),
    })?;
    let mut welder = Welder::new();
    let mut tris = Vec::new();
    let mut pending: Vec<u32> = Vec::new();
    let mut facet_offset = 0;
    let mut seen_solid = false;
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let line_offset = offset;
        offset += line.len();
        let mut tokens = line.split_whitespace();
        let Some(head) = tokens.next() else { continue };
        let err = |message: String| MeshError::Parse {
            offset: line_offset,
            message,
        };
        match head {
            "solid" if !seen_solid => seen_solid = true,
            "facet" => {
                if !pending.is_empty() {
                    return Err(err("facet started before the previous one ended".into()));
                }
                facet_offset = line_offset;
            }
            "outer" | "endloop" => {}
            "vertex" => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| err("vertex needs three coordinates".into()))?;
                    *slot = tok
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(format!("bad coordinate {tok:?}")))?;
                }
                if pending.len() == 3 {
                    return Err(err("facet has more than three vertices".into()));
                }
                pending.push(welder.add(Point::new(c[0], c[1], c[2])));
            }
            "endfacet" => {
                if pending.len() != 3 {
                    return Err(err(format!("facet has {} vertices", pending.len())));
                }
                tris.push(([pending[0], pending[1], pending[2]], facet_offset));
                pending.clear();
            }
            "endsolid" => break,
            other => return Err(err(format!("unexpected token {other:?}"))),
        }
    }
    if !seen_solid {
        return Err(MeshError::Parse {
            offset: 0,
            message: "ASCII STL must start with 'solid'".into(),
        });
    }
    if !pending.is_empty() {
        return Err(MeshError::Parse {
            offset,
            message: "unterminated facet".into(),
        });
    }
    finish(welder, tris)
}

fn load_obj(bytes: &[u8]) -> Result<TriangleMesh, MeshError> {
    let text = std::str::from_utf8(bytes).map_err(|e| MeshError::Parse {
        offset: e.valid_up_to(),
        message: "OBJ is not valid UTF-8".into(),
    })?;
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let line_offset = offset;
        offset += line.len();
        let content = line.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let err = |message: String| MeshError::Parse {
            offset: line_offset,
            message,
        };
        match tokens.next() {
            Some("v") => {
                let mut c = [0.0; 3];
                for slot in &mut c {
                    let tok = tokens
                        .next()
                        .ok_or_else(|| err("vertex needs three coordinates".into()))?;
                    *slot = tok
                        .parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| err(format!("bad coordinate {tok:?}")))?;
                }
                vertices.push(Point::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in tokens {
                    let first = tok.split('/').next().unwrap_or("");
                    let raw: i64 = first
                        .parse()
                        .map_err(|_| err(format!("bad face index {tok:?}")))?;
                    let resolved = if raw > 0 {
                        raw - 1
                    } else if raw < 0 {
                        vertices.len() as i64 + raw
                    } else {
                        -1
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(err(format!("face index {raw} out of range")));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(err("face needs at least three vertices".into()));
                }
                for k in 1..idx.len() - 1 {
                    let tri = [idx[0], idx[k], idx[k + 1]];
                    if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                        return Err(err("face repeats a vertex".into()));
                    }
                    faces.push(tri);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(vertices, faces)
}

fn facet_normal(mesh: &TriangleMesh, f: usize) -> Vector {
    mesh.face_normal(f).unwrap_or_else(Vector::zeros)
}

fn save_stl_binary(mesh: &TriangleMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.num_faces());
    let mut header = [b' '; 80];
    let tag = b"binary STL written by knurl";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.num_faces() as u32).to_le_bytes());
    for f in 0..mesh.num_faces() {
        let n = facet_normal(mesh, f);
        for c in n.iter() {
            out.extend_from_slice(&(*c as f32).to_le_bytes());
        }
        for p in mesh.face_points(f) {
            for c in p.iter() {
                out.extend_from_slice(&(*c as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

fn save_stl_ascii(mesh: &TriangleMesh) -> String {
    let mut s = String::from("solid knurl\n");
    for f in 0..mesh.num_faces() {
        let n = facet_normal(mesh, f);
        let _ = writeln!(s, "  facet normal {:e} {:e} {:e}", n.x, n.y, n.z);
        s.push_str("    outer loop\n");
        for p in mesh.face_points(f) {
            let _ = writeln!(s, "      vertex {:e} {:e} {:e}", p.x, p.y, p.z);
        }
        s.push_str("    endloop\n  endfacet\n");
    }
    s.push_str("endsolid knurl\n");
    s
}

fn save_obj(mesh: &TriangleMesh, with_normals: bool) -> String {
    let mut s = String::new();
    for p in mesh.vertices() {
        let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
    }
    let normals = mesh.normals().filter(|_| with_normals);
    if let Some(ns) = normals {
        for n in ns {
            let _ = writeln!(s, "vn {} {} {}", n.x, n.y, n.z);
        }
    }
    for f in mesh.faces() {
        let [a, b, c] = f.map(|v| v + 1);
        if normals.is_some() {
            let _ = writeln!(s, "f {a}//{a} {b}//{b} {c}//{c}");
        } else {
            let _ = writeln!(s, "f {a} {b} {c}");
        }
    }
    s
}
