//! Texture geometry: element outlines, their triangulation, insertion into
//! a surface and the offset that turns them into printable relief.

mod apply;
mod element;
mod embed;
mod offset;
mod svg;
mod triangulate;

pub use element::{point_in_ring, segments_intersect, signed_area, ElementSource, SegmentRef, TextureElement};
pub use apply::{apply_pattern, texture_placements};
pub use embed::{embed_texture, EmbeddedFeature, Embedding};
pub use offset::offset_texture;
pub use svg::parse_svg_element;
pub use triangulate::{triangulate_element, Triangulation2D};

use crate::mesh::MeshError;
use crate::surface_map::MapError;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TextureError {
    #[error("svg: {0}")]
    Svg(String),
    #[error("svg feature not supported: {0}")]
    UnsupportedSvg(String),
    #[error("svg contains an open path")]
    OpenPath,
    #[error("invalid element: {0}")]
    InvalidElement(String),
    #[error("element outline intersects itself between {a} and {b}")]
    SelfIntersection { a: SegmentRef, b: SegmentRef },
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("invalid style: {0}")]
    InvalidStyle(String),
    #[error("placements {first} and {second} overlap")]
    Overlap { first: usize, second: usize },
    #[error("placement {placement} does not fit: {reason}")]
    NotFit { placement: usize, reason: String },
    #[error("placement {placement}: offset surface intersects itself (faces {a} and {b})")]
    SelfIntersectingOffset { placement: usize, a: u32, b: u32 },
    #[error("placement {placement}: recess of {depth} mm needs more than the {available:.3} mm of material")]
    RecessTooDeep { placement: usize, depth: f64, available: f64 },
    #[error("result is not watertight: {0}")]
    NotWatertight(String),
    #[error("suggestion must be accepted before it is applied")]
    NotAccepted,
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum StyleKind {
    Raised,
    Recessed,
    Hollow,
}

/// How an element becomes relief.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TextureStyle {
    pub kind: StyleKind,
    /// Height for raised and hollow, depth for recessed (mm).
    pub height: f64,
    /// Shell thickness around a hollow cavity (mm).
    pub wall_thickness: Option<f64>,
}

impl TextureStyle {
    pub fn raised(height: f64) -> Result<Self, TextureError> {
        Self::new(StyleKind::Raised, height, None)
    }

    pub fn recessed(depth: f64) -> Result<Self, TextureError> {
        Self::new(StyleKind::Recessed, depth, None)
    }

    pub fn hollow(height: f64, wall: f64) -> Result<Self, TextureError> {
        Self::new(StyleKind::Hollow, height, Some(wall))
    }

    pub fn new(kind: StyleKind, height: f64, wall_thickness: Option<f64>) -> Result<Self, TextureError> {
        let s = TextureStyle {
            kind,
            height,
            wall_thickness,
        };
        s.validate(0.0)?;
        Ok(s)
    }

    /// Checks the invariants, with `min_wall` as the thinnest hollow wall.
    pub fn validate(&self, min_wall: f64) -> Result<(), TextureError> {
        if !(self.height > 0.0 && self.height.is_finite()) {
            return Err(TextureError::InvalidStyle(format!("height must be positive, got {}", self.height)));
        }
        match (self.kind, self.wall_thickness) {
            (StyleKind::Hollow, Some(t)) => {
                if !(t > 0.0 && t.is_finite()) {
                    return Err(TextureError::InvalidStyle(format!("wall thickness must be positive, got {t}")));
                }
                if t < min_wall {
                    return Err(TextureError::InvalidStyle(format!("wall thickness {t} is below the {min_wall} mm minimum")));
                }
                if t >= self.height {
                    return Err(TextureError::InvalidStyle(format!(
                        "wall thickness {t} leaves no cavity under a {} mm height",
                        self.height
                    )));
                }
            }
            (StyleKind::Hollow, None) => return Err(TextureError::InvalidStyle("hollow style needs a wall thickness".into())),
            _ => {}
        }
        Ok(())
    }
}
