use super::TextureError;
use crate::surface_map::Vec2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ElementSource {
    Sketch,
    Svg,
}

/// One segment of an element outline: loop 0 is the outer boundary, loop
/// `k > 0` is hole `k - 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentRef {
    pub ring: usize,
    pub segment: usize,
}

impl std::fmt::Display for SegmentRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "loop {} segment {}", self.ring, self.segment)
    }
}

/// A 2D shape, in millimeters, repeated to form a texture. The outer loop
/// runs counter-clockwise and holes clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TextureElement {
    pub outer: Vec<Vec2>,
    pub holes: Vec<Vec<Vec2>>,
    pub source: ElementSource,
}

pub(crate) fn cross(a: Vec2, b: Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Shoelace area, positive for counter-clockwise loops.
pub fn signed_area(ring: &[Vec2]) -> f64 {
    let n = ring.len();
    (0..n).map(|i| cross(ring[i], ring[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Even-odd point-in-polygon test.
pub fn point_in_ring(p: Vec2, ring: &[Vec2]) -> bool {
    let n = ring.len();
    let mut inside = false;
    for i in 0..n {
        let (a, b) = (ring[i], ring[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    cross(b - a, c - a)
}

fn on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, touching included.
pub fn segments_intersect(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let (d1, d2) = (orient(c, d, a), orient(c, d, b));
    let (d3, d4) = (orient(a, b, c), orient(a, b, d));
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Distance from `p` to segment `ab`.
pub fn point_segment_distance(p: Vec2, a: Vec2, b: Vec2) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (a + ab * t - p).norm()
}

pub fn segment_distance(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> f64 {
    if segments_intersect(a, b, c, d) {
        return 0.0;
    }
    point_segment_distance(a, c, d)
        .min(point_segment_distance(b, c, d))
        .min(point_segment_distance(c, a, b))
        .min(point_segment_distance(d, a, b))
}

fn clean(ring: &[Vec2]) -> Vec<Vec2> {
    let mut out: Vec<Vec2> = Vec::with_capacity(ring.len());
    for &p in ring {
        if out.last().is_none_or(|q| (p - q).norm() > 1e-9) {
            out.push(p);
        }
    }
    while out.len() > 1 && (out[0] - out[out.len() - 1]).norm() <= 1e-9 {
        out.pop();
    }
    out
}

impl TextureElement {
    /// Validates and normalizes winding.
    pub fn new(outer: Vec<Vec2>, holes: Vec<Vec<Vec2>>, source: ElementSource) -> Result<Self, TextureError> {
        let mut outer = clean(&outer);
        if signed_area(&outer) < 0.0 {
            outer.reverse();
        }
        let holes = holes
            .iter()
            .map(|h| {
                let mut h = clean(h);
                if signed_area(&h) > 0.0 {
                    h.reverse();
                }
                h
            })
            .collect();
        let e = TextureElement { outer, holes, source };
        e.validate()?;
        Ok(e)
    }

    /// Axis-aligned square of side `size` centered on the origin.
    pub fn square(size: f64) -> Self {
        let h = size / 2.0;
        let outer = vec![Vec2::new(-h, -h), Vec2::new(h, -h), Vec2::new(h, h), Vec2::new(-h, h)];
        TextureElement::new(outer, vec![], ElementSource::Sketch).expect("square is valid")
    }

    /// Regular polygon with the same area as the circle of radius `r`,
    /// with enough sides to stay within `tolerance` of it.
    pub fn circle(r: f64, tolerance: f64) -> Self {
        let outer = circle_ring(Vec2::zeros(), r, r, tolerance);
        TextureElement::new(outer, vec![], ElementSource::Sketch).expect("circle is valid")
    }

    pub fn rings(&self) -> impl Iterator<Item = &Vec<Vec2>> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    /// Outer area minus holes.
    pub fn area(&self) -> f64 {
        self.rings().map(|r| signed_area(r)).sum()
    }

    /// Whether `p` is in the element (inside the outer loop, outside holes).
    pub fn contains(&self, p: Vec2) -> bool {
        self.rings().filter(|r| point_in_ring(p, r)).count() % 2 == 1
    }

    /// Largest distance from the origin to the outline.
    pub fn radius(&self) -> f64 {
        self.outer.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Every outline segment with its reference.
    pub fn segments(&self) -> Vec<(SegmentRef, Vec2, Vec2)> {
        let mut out = Vec::new();
        for (ring, pts) in self.rings().enumerate() {
            let n = pts.len();
            for segment in 0..n {
                out.push((SegmentRef { ring, segment }, pts[segment], pts[(segment + 1) % n]));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<(), TextureError> {
        if self.rings().any(|r| r.len() < 3) {
            return Err(TextureError::InvalidElement("every loop needs three points".into()));
        }
        let segs = self.segments();
        let ring_len: Vec<usize> = self.rings().map(Vec::len).collect();
        for (x, &(ra, a0, a1)) in segs.iter().enumerate() {
            for &(rb, b0, b1) in &segs[x + 1..] {
                let adjacent = ra.ring == rb.ring && {
                    let n = ring_len[ra.ring];
                    (ra.segment + 1) % n == rb.segment || (rb.segment + 1) % n == ra.segment
                };
                let hit = if adjacent {
                    // neighbors share one endpoint; they may only overlap if collinear and folded back
                    let (p, q, r) = if (ra.segment + 1) % ring_len[ra.ring] == rb.segment {
                        (a0, a1, b1)
                    } else {
                        (b0, b1, a1)
                    };
                    orient(p, q, r) == 0.0 && (r - q).dot(&(p - q)) > 0.0
                } else {
                    segments_intersect(a0, a1, b0, b1)
                };
                if hit {
                    return Err(TextureError::SelfIntersection { a: ra, b: rb });
                }
            }
        }
        for (i, r) in self.rings().enumerate() {
            if r.len() < 3 || signed_area(r).abs() < 1e-12 {
                return Err(TextureError::InvalidElement(format!("loop {i} has no area")));
            }
            if i == 0 && signed_area(r) < 0.0 {
                return Err(TextureError::InvalidElement("outer loop must be counter-clockwise".into()));
            }
            if i > 0 && signed_area(r) > 0.0 {
                return Err(TextureError::InvalidElement(format!("hole {} must be clockwise", i - 1)));
            }
        }
        for (k, h) in self.holes.iter().enumerate() {
            if !h.iter().all(|&p| point_in_ring(p, &self.outer)) {
                return Err(TextureError::InvalidElement(format!("hole {k} is not inside the outer loop")));
            }
            for (m, g) in self.holes.iter().enumerate() {
                if m != k && point_in_ring(h[0], g) {
                    return Err(TextureError::InvalidElement(format!("hole {k} lies inside hole {m}")));
                }
            }
        }
        Ok(())
    }

    /// Same shape scaled about the origin.
    pub fn scaled(&self, s: f64) -> Self {
        TextureElement {
            outer: self.outer.iter().map(|p| p * s).collect(),
            holes: self.holes.iter().map(|h| h.iter().map(|p| p * s).collect()).collect(),
            source: self.source,
        }
    }

    /// Shrinks the element by `d`: the outer loop moves in and holes grow.
    pub fn inset(&self, d: f64) -> Result<Self, TextureError> {
        let outer = offset_left(&self.outer, d);
        let holes = self.holes.iter().map(|h| offset_left(h, d)).collect();
        let e = TextureElement {
            outer,
            holes,
            source: self.source,
        };
        e.validate()
            .map_err(|_| TextureError::InvalidStyle(format!("element is too thin for a {d} mm wall")))?;
        // a sharp spike can flip inside out without self-intersecting
        if e.area() <= 0.0 || e.area() >= self.area() {
            return Err(TextureError::InvalidStyle(format!("element is too thin for a {d} mm wall")));
        }
        Ok(e)
    }
}

/// Moves every edge of `ring` by `d` to its left, joining with miters.
pub(crate) fn offset_left(ring: &[Vec2], d: f64) -> Vec<Vec2> {
    let n = ring.len();
    (0..n)
        .map(|i| {
            let (p, c, q) = (ring[(i + n - 1) % n], ring[i], ring[(i + 1) % n]);
            let e0 = (c - p).normalize();
            let e1 = (q - c).normalize();
            let n0 = Vec2::new(-e0.y, e0.x);
            let n1 = Vec2::new(-e1.y, e1.x);
            let bis = n0 + n1;
            let denom = 1.0 + n0.dot(&n1);
            if denom < 1e-9 {
                c + n0 * d
            } else {
                c + bis * (d / denom)
            }
        })
        .collect()
}

/// Flattened ellipse whose area equals the true ellipse area.
pub(crate) fn circle_ring(center: Vec2, rx: f64, ry: f64, tolerance: f64) -> Vec<Vec2> {
    let r = rx.max(ry);
    let ratio = (1.0 - tolerance / r).clamp(-1.0, 1.0);
    let n = ((std::f64::consts::PI / ratio.acos()).ceil() as usize).max(8);
    let t = std::f64::consts::TAU / n as f64;
    // polygon area n/2 sin(t) r^2 against pi r^2
    let k = (std::f64::consts::TAU / (n as f64 * t.sin())).sqrt();
    (0..n)
        .map(|i| {
            let a = t * i as f64;
            center + Vec2::new(k * rx * a.cos(), k * ry * a.sin())
        })
        .collect()
}
