use super::RegionError;
use crate::exec::Execution;
use crate::mesh::TriangleMesh;

/// Minimum edge weight; keeps every off-diagonal entry negative so the
/// discrete maximum principle holds on obtuse triangulations.
pub const MIN_WEIGHT: f64 = 1e-6;
/// Largest accepted row-normalized residual at a free vertex.
pub const MAX_RESIDUAL: f64 = 1e-8;

/// Symmetric cotangent weights, stored per vertex as sorted `(neighbor, w)`.
#[derive(Debug, Clone)]
pub struct Laplacian {
    rows: Vec<Vec<(u32, f64)>>,
    diag: Vec<f64>,
}

impl Laplacian {
    pub fn row(&self, v: u32) -> &[(u32, f64)] {
        &self.rows[v as usize]
    }

    pub fn diagonal(&self, v: u32) -> f64 {
        self.diag[v as usize]
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `|Σ_j w_ij (u_i − u_j)| / Σ_j w_ij`, or 0 for an isolated vertex.
    pub fn normalized_residual(&self, values: &[f64], v: u32) -> f64 {
        let d = self.diag[v as usize];
        if d == 0.0 {
            return 0.0;
        }
        let ui = values[v as usize];
        let r: f64 = self.rows[v as usize]
            .iter()
            .map(|&(j, w)| w * (ui - values[j as usize]))
            .sum();
        r.abs() / d
    }
}

/// `w_ij = max(MIN_WEIGHT, (cot α + cot β) / 2)` over the angles opposite
/// each edge (one term on boundary edges).
pub fn cotangent_laplacian(mesh: &TriangleMesh) -> Laplacian {
    let n = mesh.num_vertices();
    let mut acc: std::collections::BTreeMap<(u32, u32), f64> = Default::default();
    for f in 0..mesh.num_faces() {
        let face = mesh.face(f);
        let pts = mesh.face_points(f);
        for k in 0..3 {
            let (a, b) = (face[(k + 1) % 3], face[(k + 2) % 3]);
            let u = pts[(k + 1) % 3] - pts[k];
            let v = pts[(k + 2) % 3] - pts[k];
            let cross = u.cross(&v).norm();
            let cot = if cross > 0.0 { u.dot(&v) / cross } else { 0.0 };
            *acc.entry((a.min(b), a.max(b))).or_insert(0.0) += 0.5 * cot;
        }
    }
    let mut rows = vec![Vec::new(); n];
    for (&(a, b), &w) in &acc {
        let w = w.max(MIN_WEIGHT);
        rows[a as usize].push((b, w));
        rows[b as usize].push((a, w));
    }
    for r in &mut rows {
        r.sort_unstable_by_key(|e| e.0);
    }
    let diag = rows.iter().map(|r| r.iter().map(|e| e.1).sum()).collect();
    Laplacian { rows, diag }
}

/// Per-vertex harmonic values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    values: Vec<f64>,
    residual: f64,
}

impl ScalarField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Largest row-normalized Laplace residual over the free vertices.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// Harmonic field equal to 1 on `sources` and 0 on `sinks`.
pub fn harmonic_field(
    mesh: &TriangleMesh,
    sources: &[u32],
    sinks: &[u32],
    exec: Execution,
) -> Result<ScalarField, RegionError> {
    if sources.is_empty() || sinks.is_empty() || sources.iter().any(|s| sinks.contains(s)) {
        return Err(RegionError::BadPins);
    }
    let pins: Vec<(u32, f64)> = sources
        .iter()
        .map(|&v| (v, 1.0))
        .chain(sinks.iter().map(|&v| (v, 0.0)))
        .collect();
    harmonic_field_pinned(mesh, &cotangent_laplacian(mesh), &pins, exec)
}

/// Harmonic field with arbitrary pinned values, solved by Jacobi
/// preconditioned conjugate gradients on the free vertices.
pub fn harmonic_field_pinned(
    mesh: &TriangleMesh,
    lap: &Laplacian,
    pins: &[(u32, f64)],
    exec: Execution,
) -> Result<ScalarField, RegionError> {
    let n = mesh.num_vertices();
    if pins.is_empty() {
        return Err(RegionError::BadPins);
    }
    let mut pinned = vec![false; n];
    let mut values = vec![0.0; n];
    for &(v, x) in pins {
        if v as usize >= n || !x.is_finite() {
            return Err(RegionError::BadPins);
        }
        if pinned[v as usize] && values[v as usize] != x {
            return Err(RegionError::BadPins);
        }
        pinned[v as usize] = true;
        values[v as usize] = x;
    }
    check_components(lap, &pinned)?;

    let free: Vec<u32> = (0..n as u32).filter(|&v| !pinned[v as usize]).collect();
    let mut slot = vec![u32::MAX; n];
    for (i, &v) in free.iter().enumerate() {
        slot[v as usize] = i as u32;
    }
    let m = free.len();
    // b = Σ_{j pinned} w_ij u_j
    let b: Vec<f64> = exec.map(&free, |&v| {
        lap.row(v)
            .iter()
            .filter(|(j, _)| pinned[*j as usize])
            .map(|&(j, w)| w * values[j as usize])
            .sum()
    });
    let apply = |x: &[f64], y: &mut [f64]| {
        exec.fill(y, |i| {
            let v = free[i];
            let mut s = lap.diagonal(v) * x[i];
            for &(j, w) in lap.row(v) {
                let k = slot[j as usize];
                if k != u32::MAX {
                    s -= w * x[k as usize];
                }
            }
            s
        })
    };
    let inv_diag: Vec<f64> = free.iter().map(|&v| 1.0 / lap.diagonal(v)).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let normalized_inf = |r: &[f64]| {
        r.iter()
            .zip(&inv_diag)
            .map(|(x, d)| (x * d).abs())
            .fold(0.0, f64::max)
    };

    // Start from the mean pinned value: exact for constant pin sets.
    let start = pins.iter().map(|p| p.1).sum::<f64>() / pins.len() as f64;
    let mut x = vec![start; m];
    let mut ax = vec![0.0; m];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; m];
    let max_iter = 20 * m + 100;
    for _ in 0..max_iter {
        if normalized_inf(&r) <= MAX_RESIDUAL * 1e-3 {
            break;
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..m {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    for (i, &v) in free.iter().enumerate() {
        values[v as usize] = x[i];
    }
    let residual = free
        .iter()
        .map(|&v| lap.normalized_residual(&values, v))
        .fold(0.0, f64::max);
    if residual > MAX_RESIDUAL {
        return Err(RegionError::NotConverged { residual });
    }
    Ok(ScalarField { values, residual })
}

fn check_components(lap: &Laplacian, pinned: &[bool]) -> Result<(), RegionError> {
    let n = lap.len();
    let mut seen = vec![false; n];
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut stack = vec![start as u32];
        let mut members = Vec::new();
        let mut has_pin = false;
        while let Some(v) = stack.pop() {
            members.push(v);
            has_pin |= pinned[v as usize];
            for &(w, _) in lap.row(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    stack.push(w);
                }
            }
        }
        if !has_pin {
            return Err(RegionError::UnconstrainedComponent {
                first: members.iter().copied().min().unwrap(),
                size: members.len(),
            });
        }
    }
    Ok(())
}
