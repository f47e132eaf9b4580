use super::element::TextureElement;
use super::TextureError;
use crate::surface_map::Vec2;
use serde::{Deserialize, Serialize};
use spade::handles::FixedVertexHandle;
use spade::{AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation};
use std::collections::HashSet;

/// A planar triangulation; `boundary[i]` marks points on the element outline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Triangulation2D {
    pub points: Vec<Vec2>,
    pub triangles: Vec<[u32; 3]>,
    pub boundary: Vec<bool>,
}

impl Triangulation2D {
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.points[i as usize]);
                super::element::cross(b - a, c - a) / 2.0
            })
            .sum()
    }

    /// Smallest interior angle over all triangles, in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut best = 180.0f64;
        for t in &self.triangles {
            let p = t.map(|i| self.points[i as usize]);
            for k in 0..3 {
                let a = p[(k + 1) % 3] - p[k];
                let b = p[(k + 2) % 3] - p[k];
                best = best.min(a.angle(&b).to_degrees());
            }
        }
        best
    }
}

pub(crate) type Cdt = ConstrainedDelaunayTriangulation<Point2<f64>>;

pub(crate) fn insert(cdt: &mut Cdt, p: Vec2) -> Result<FixedVertexHandle, TextureError> {
    cdt.insert(Point2::new(p.x, p.y))
        .map_err(|e| TextureError::Triangulation(format!("{e:?}")))
}

/// Constrains `a -> b`; fails if the segment would cross an existing
/// constraint.
pub(crate) fn constrain(cdt: &mut Cdt, a: FixedVertexHandle, b: FixedVertexHandle) -> Result<(), TextureError> {
    if a == b || cdt.exists_constraint(a, b) {
        return Ok(());
    }
    cdt.try_add_constraint(a, b);
    if cdt.exists_constraint(a, b) {
        Ok(())
    } else {
        Err(TextureError::Triangulation("constraint crosses another constraint".into()))
    }
}

/// Constrained Delaunay triangulation of the element, refined to a 20°
/// minimum angle with interior points only.
pub fn triangulate_element(e: &TextureElement) -> Result<Triangulation2D, TextureError> {
    e.validate()?;
    let mut cdt = Cdt::new();
    let mut on_outline = HashSet::new();
    for ring in e.rings() {
        let handles: Vec<FixedVertexHandle> = ring.iter().map(|&p| insert(&mut cdt, p)).collect::<Result<_, _>>()?;
        on_outline.extend(handles.iter().copied());
        for i in 0..handles.len() {
            constrain(&mut cdt, handles[i], handles[(i + 1) % handles.len()])?;
        }
    }
    let params = RefinementParameters::<f64>::new()
        .with_angle_limit(AngleLimit::from_deg(20.0))
        .keep_constraint_edges()
        .exclude_outer_faces(true)
        .with_max_additional_vertices(20_000);
    let result = cdt.refine(params);
    let excluded: HashSet<_> = result.excluded_faces.iter().copied().collect();
    let points: Vec<Vec2> = cdt
        .vertices()
        .map(|v| {
            let p = v.position();
            Vec2::new(p.x, p.y)
        })
        .collect();
    let boundary = cdt.fixed_vertices().map(|h| on_outline.contains(&h)).collect();
    let triangles = cdt
        .inner_faces()
        .filter(|f| !excluded.contains(&f.fix()))
        .map(|f| f.vertices().map(|v| v.fix().index() as u32))
        .collect();
    Ok(Triangulation2D {
        points,
        triangles,
        boundary,
    })
}
