use super::{Demo, PatternError, PatternSuggestion, RepetitionSeed, SuggestionKind, SuggestionStatus};
use crate::config::PatternConfig;
use crate::region::closest_face;
use crate::surface_map::{Placement, SurfaceMap, SurfacePoint, Vec2};
use crate::{Execution, Point};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

/// Everything needed to turn pattern parameters into placements.
pub struct Expander<'m, 'a> {
    /// Surface map, normally confined to the active region.
    pub map: &'m SurfaceMap<'a>,
    /// Element outline in element units; a placement counts as inside when
    /// this whole outline maps into the region.
    pub footprint: Vec<Vec2>,
    pub config: PatternConfig,
    pub exec: Execution,
}

/// Requested changes to a pending suggestion.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuggestionEdits {
    pub u_step: Option<Vec2>,
    pub v_step: Option<Vec2>,
    /// Path spacing, or the length of the first lattice step (the second
    /// step is scaled by the same factor).
    pub spacing: Option<f64>,
    pub rotation: Option<f64>,
    pub scale: Option<f64>,
}

#[derive(PartialEq)]
struct Dist(f64, u32);

impl Eq for Dist {}

impl Ord for Dist {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Dist {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Expander<'_, '_> {
    /// Whether the placement's mapped outline stays in the region.
    pub fn contains(&self, p: &Placement) -> bool {
        let Ok(frame) = self.map.local_frame(p) else {
            return false;
        };
        self.map.map_polygon(&frame, &self.footprint).is_ok()
    }

    /// Upper bound on how far a surface walk from `anchor` can go and still
    /// end in the region: largest edge-path distance over region edges,
    /// plus one edge.
    fn reach(&self, anchor: &SurfacePoint) -> f64 {
        let mesh = self.map.mesh();
        let mut adj: HashMap<u32, Vec<(u32, f64)>> = HashMap::new();
        let mut longest = 0.0f64;
        for f in 0..mesh.num_faces() as u32 {
            if !self.map.in_region(f) {
                continue;
            }
            let v = mesh.face(f as usize);
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                let w = (mesh.vertex(a as usize) - mesh.vertex(b as usize)).norm();
                longest = longest.max(w);
                adj.entry(a).or_default().push((b, w));
                adj.entry(b).or_default().push((a, w));
            }
        }
        let start = self.map.position(anchor);
        let mut dist: HashMap<u32, f64> = HashMap::new();
        let mut heap = BinaryHeap::new();
        for v in mesh.face(anchor.face as usize) {
            let d = (mesh.vertex(v as usize) - start).norm();
            heap.push(Dist(d, v));
        }
        let mut far = 0.0f64;
        while let Some(Dist(d, v)) = heap.pop() {
            if dist.contains_key(&v) {
                continue;
            }
            dist.insert(v, d);
            far = far.max(d);
            for &(w, len) in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                if !dist.contains_key(&w) {
                    heap.push(Dist(d + len, w));
                }
            }
        }
        far + longest
    }

    fn lattice(
        &self,
        base: &Placement,
        u: Vec2,
        v: Option<Vec2>,
        counts: Option<[usize; 2]>,
        demos: &[Demo],
    ) -> Result<Vec<Placement>, PatternError> {
        check_step(u)?;
        let sigma = match v {
            None => u.norm(),
            Some(v) => {
                check_step(v)?;
                if (u.x * v.y - u.y * v.x).abs() <= 1e-9 * u.norm() * v.norm() {
                    return Err(PatternError::DependentSteps);
                }
                let m = nalgebra::Matrix2::from_columns(&[u, v]);
                m.singular_values().min()
            }
        };
        if demos.iter().any(|d| !self.contains(&d.placement)) {
            return Err(PatternError::RegionTooSmall);
        }
        let reach = self.reach(&base.anchor);
        let bound = (reach / sigma).ceil() as i64 + 1;
        let (ni, nj) = match counts {
            Some([a, b]) => {
                if a == 0 || (v.is_some() && b == 0) {
                    return Err(PatternError::InvalidStep("lattice counts must be positive".into()));
                }
                ((a as i64 - 1).min(bound), (b as i64 - 1).min(bound))
            }
            None => (bound, bound),
        };
        let nj = if v.is_some() { nj } else { 0 };
        let v = v.unwrap_or_else(Vec2::zeros);
        if (ni + 1).saturating_mul(nj + 1) > 4_000_000 {
            return Err(PatternError::InvalidStep("step is too small for the region".into()));
        }
        let mut candidates = Vec::new();
        for j in 0..=nj {
            for i in 0..=ni {
                if demos.iter().any(|d| d.index == [i, j]) {
                    continue;
                }
                let q = u * i as f64 + v * j as f64;
                if q.norm() <= reach {
                    candidates.push(([i, j], q));
                }
            }
        }
        let frame = self.map.base_frame(base.anchor)?;
        let mapped = self.exec.map(&candidates, |(_, q)| {
            let anchor = self.map.map_point(&frame, *q).ok()?;
            let p = Placement {
                anchor,
                rotation: base.rotation,
                scale: base.scale,
            };
            self.contains(&p).then_some(p)
        });
        // The first step in each direction must fit, or there is no pattern.
        let mut first_steps = Vec::new();
        if ni >= 1 {
            first_steps.push([1, 0]);
        }
        if nj >= 1 {
            first_steps.push([0, 1]);
        }
        for idx in first_steps {
            let fits = demos.iter().any(|d| d.index == idx)
                || candidates.iter().zip(&mapped).any(|((c, _), p)| *c == idx && p.is_some());
            if !fits {
                return Err(PatternError::RegionTooSmall);
            }
        }
        let mut out: Vec<Placement> = demos.iter().map(|d| d.placement).collect();
        let mut seen: Vec<Point> = out.iter().map(|p| self.map.position(&p.anchor)).collect();
        for p in mapped.into_iter().flatten() {
            if out.len() >= self.config.max_placements {
                break;
            }
            let pos = self.map.position(&p.anchor);
            // a walk that wraps around can land back on an earlier spot
            if seen.iter().any(|s| (s - pos).norm() < 1e-6) {
                continue;
            }
            seen.push(pos);
            out.push(p);
        }
        Ok(out)
    }

    fn path(&self, base: &Placement, stroke: &[SurfacePoint], spacing: f64, turn: f64) -> Result<Vec<Placement>, PatternError> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(PatternError::InvalidEdit(format!("spacing must be positive, got {spacing}")));
        }
        let pts: Vec<Point> = stroke.iter().map(|s| self.map.position(s)).collect();
        let mut cum = vec![0.0];
        for w in pts.windows(2) {
            cum.push(cum.last().unwrap() + (w[1] - w[0]).norm());
        }
        let total = *cum.last().unwrap();
        if stroke.len() < 2 || total <= 0.0 {
            return Err(PatternError::EmptyStroke);
        }
        let count = (total / spacing * (1.0 + 1e-12)).floor() as usize + 1;
        let segs = pts.len() - 1;
        let mut out = Vec::new();
        let mut seg = 0;
        for k in 0..count {
            if out.len() >= self.config.max_placements {
                break;
            }
            let s = (k as f64 * spacing).min(total);
            while seg + 1 < segs && cum[seg + 1] <= s {
                seg += 1;
            }
            // skip zero-length pieces
            while seg + 1 < segs && cum[seg + 1] - cum[seg] <= 0.0 {
                seg += 1;
            }
            let len = cum[seg + 1] - cum[seg];
            let mut t = if len > 0.0 { ((s - cum[seg]) / len).clamp(0.0, 1.0) } else { 0.0 };
            let mut at = seg;
            if t > 1.0 - 1e-9 && at + 1 < segs {
                at += 1;
                t = 0.0;
            }
            let anchor = self.point_on_stroke(stroke, &pts, at, t);
            let tangent = pts[at + 1] - pts[at];
            let frame = self.map.base_frame(anchor)?;
            let rotation = (tangent.dot(&frame.e2).atan2(tangent.dot(&frame.e1)) + turn).rem_euclid(std::f64::consts::TAU);
            let p = Placement {
                anchor,
                rotation,
                scale: base.scale,
            };
            let pos = self.map.position(&p.anchor);
            // closed strokes end where they start
            let repeat = out.iter().any(|q: &Placement| (self.map.position(&q.anchor) - pos).norm() < 1e-6);
            if !repeat && self.contains(&p) {
                out.push(p);
            }
        }
        Ok(out)
    }

    fn point_on_stroke(&self, stroke: &[SurfacePoint], pts: &[Point], seg: usize, t: f64) -> SurfacePoint {
        let (a, b) = (stroke[seg], stroke[seg + 1]);
        if t == 0.0 {
            return a;
        }
        if t == 1.0 {
            return b;
        }
        if a.face == b.face {
            let bary = [0, 1, 2].map(|k| a.bary[k] * (1.0 - t) + b.bary[k] * t);
            return SurfacePoint::new_clamped(a.face, bary);
        }
        let p = pts[seg] + (pts[seg + 1] - pts[seg]) * t;
        match closest_face(self.map.mesh(), &p, Execution::Sequential) {
            Some((f, bary, _)) => SurfacePoint::new_clamped(f, bary),
            None => a,
        }
    }
}

fn check_step(s: Vec2) -> Result<(), PatternError> {
    if !(s.norm() > 1e-9 && s.x.is_finite() && s.y.is_finite()) {
        return Err(PatternError::InvalidStep(format!("step ({}, {}) must be non-zero", s.x, s.y)));
    }
    Ok(())
}

/// Lattice suggestion from a seed: the base plus every integer combination
/// `i * u + j * v` (`i, j >= 0`) whose mapped outline fits in the region.
/// Demonstrated placements come first, unchanged.
pub fn extrapolate_lattice(
    ex: &Expander,
    seed: &RepetitionSeed,
    v_step: Option<Vec2>,
    counts: Option<[usize; 2]>,
) -> Result<PatternSuggestion, PatternError> {
    let expanded = ex.lattice(&seed.base, seed.step, v_step, counts, &seed.demos)?;
    Ok(PatternSuggestion {
        kind: if v_step.is_some() {
            SuggestionKind::Lattice2d
        } else {
            SuggestionKind::Lattice1d
        },
        element: seed.element,
        base: seed.base,
        u_step: seed.step,
        v_step,
        path: Vec::new(),
        spacing: None,
        counts,
        demos: seed.demos.clone(),
        expanded,
        status: SuggestionStatus::Pending,
    })
}

/// Path suggestion: placements every `|seed.step|` of arclength along
/// `stroke`, each turned to follow the stroke.
pub fn extrapolate_path(ex: &Expander, seed: &RepetitionSeed, stroke: &[SurfacePoint]) -> Result<PatternSuggestion, PatternError> {
    let spacing = seed.step.norm();
    let expanded = ex.path(&seed.base, stroke, spacing, 0.0)?;
    Ok(PatternSuggestion {
        kind: SuggestionKind::Path,
        element: seed.element,
        base: Placement {
            rotation: 0.0,
            ..seed.base
        },
        u_step: seed.step,
        v_step: None,
        path: stroke.to_vec(),
        spacing: Some(spacing),
        counts: None,
        demos: seed.demos.clone(),
        expanded,
        status: SuggestionStatus::Pending,
    })
}

/// Re-expands a pending suggestion with edited parameters. The base stays
/// put; other demonstrations snap to the new lattice. For paths the
/// rotation edit is an extra turn on top of the stroke direction.
pub fn adjust_suggestion(ex: &Expander, s: &PatternSuggestion, edits: &SuggestionEdits) -> Result<PatternSuggestion, PatternError> {
    if s.status != SuggestionStatus::Pending {
        return Err(PatternError::NotPending(s.status));
    }
    if let Some(sp) = edits.spacing {
        if !(sp > 0.0 && sp.is_finite()) {
            return Err(PatternError::InvalidEdit(format!("spacing must be positive, got {sp}")));
        }
    }
    if let Some(sc) = edits.scale {
        if !(sc > 0.0 && sc.is_finite()) {
            return Err(PatternError::InvalidEdit(format!("scale must be positive, got {sc}")));
        }
    }
    if edits.rotation.is_some_and(|r| !r.is_finite()) {
        return Err(PatternError::InvalidEdit("rotation is not finite".into()));
    }
    let base = Placement {
        rotation: edits.rotation.unwrap_or(s.base.rotation),
        scale: edits.scale.unwrap_or(s.base.scale),
        ..s.base
    };
    let mut out = s.clone();
    out.base = base;
    match s.kind {
        SuggestionKind::Path => {
            let spacing = edits
                .spacing
                .or(edits.u_step.map(|u| u.norm()))
                .unwrap_or(s.spacing.unwrap_or(s.u_step.norm()));
            if edits.v_step.is_some() {
                return Err(PatternError::InvalidEdit("paths have a single step".into()));
            }
            if base == s.base && Some(spacing) == s.spacing {
                return Ok(out);
            }
            out.spacing = Some(spacing);
            out.expanded = ex.path(&base, &s.path, spacing, base.rotation)?;
        }
        SuggestionKind::Lattice1d | SuggestionKind::Lattice2d => {
            let mut u = edits.u_step.unwrap_or(s.u_step);
            let mut v = edits.v_step.or(s.v_step);
            check_step(u).map_err(|e| PatternError::InvalidEdit(e.to_string()))?;
            if let Some(sp) = edits.spacing {
                let f = sp / u.norm();
                u *= f;
                v = v.map(|v| v * f);
            }
            if base == s.base && u == s.u_step && v == s.v_step {
                return Ok(out);
            }
            let demos = vec![Demo {
                index: [0, 0],
                placement: base,
            }];
            out.expanded = ex.lattice(&base, u, v, s.counts, &demos).map_err(|e| match e {
                PatternError::InvalidStep(m) => PatternError::InvalidEdit(m),
                PatternError::DependentSteps => PatternError::InvalidEdit("steps are linearly dependent".into()),
                other => other,
            })?;
            out.kind = if v.is_some() {
                SuggestionKind::Lattice2d
            } else {
                SuggestionKind::Lattice1d
            };
            out.u_step = u;
            out.v_step = v;
            out.demos = demos;
        }
    }
    Ok(out)
}
