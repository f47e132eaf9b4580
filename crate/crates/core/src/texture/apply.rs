use super::embed::embed_texture;
use super::offset::offset_texture;
use super::{TextureElement, TextureError, TextureStyle};
use crate::config::TextureConfig;
use crate::exec::Execution;
use crate::mesh::TriangleMesh;
use crate::pattern::{PatternSuggestion, SuggestionStatus};
use crate::region::SurfaceRegion;
use crate::surface_map::Placement;

/// Embeds and offsets `element` at every placement.
pub fn texture_placements(
    mesh: &TriangleMesh,
    region: &SurfaceRegion,
    placements: &[Placement],
    element: &TextureElement,
    style: &TextureStyle,
    config: &TextureConfig,
    exec: Execution,
) -> Result<TriangleMesh, TextureError> {
    style.validate(config.min_wall)?;
    if placements.is_empty() {
        return Ok(mesh.clone());
    }
    let embedding = embed_texture(mesh, region, placements, element, config, exec)?;
    offset_texture(&embedding, style, config, exec)
}

/// Applies an accepted suggestion over all of its expanded placements.
pub fn apply_pattern(
    mesh: &TriangleMesh,
    region: &SurfaceRegion,
    suggestion: &PatternSuggestion,
    element: &TextureElement,
    style: &TextureStyle,
    config: &TextureConfig,
    exec: Execution,
) -> Result<TriangleMesh, TextureError> {
    if suggestion.status != SuggestionStatus::Accepted {
        return Err(TextureError::NotAccepted);
    }
    texture_placements(mesh, region, &suggestion.expanded, element, style, config, exec)
}
