//! Tunable constants, loadable from a TOML file with `[region]`,
//! `[texture]` and `[pattern]` tables. Missing keys keep their defaults.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    /// Distortion probe radius as a fraction of the bounding-box diagonal.
    pub radius_fraction: f64,
    /// Maximum number of terminal vertices.
    pub k: usize,
    /// Minimum distortion for a terminal vertex.
    pub threshold: f64,
    /// Minimum terminal separation as a fraction of the diagonal.
    pub separation_fraction: f64,
    pub isovalue: f64,
    /// Largest cursor-to-surface distance, as a fraction of the diagonal,
    /// that still counts as a hit.
    pub hit_tolerance_fraction: f64,
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig {
            radius_fraction: 0.05,
            k: 8,
            threshold: 0.15,
            separation_fraction: 0.05,
            isovalue: 0.5,
            hit_tolerance_fraction: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TextureConfig {
    /// Thinnest wall allowed for hollow textures (mm).
    pub min_wall: f64,
    /// Edges shorter than this are collapsed before output (mm).
    pub min_edge: f64,
    /// Maximum distance between a curve and its flattened polyline (mm).
    pub chordal_tolerance: f64,
    /// Largest normal deviation (degrees) from the anchor face allowed in
    /// the local chart used to insert an element.
    pub max_chart_angle_deg: f64,
}

impl Default for TextureConfig {
    fn default() -> Self {
        TextureConfig {
            min_wall: 0.8,
            min_edge: 1e-3,
            chordal_tolerance: 0.05,
            max_chart_angle_deg: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternConfig {
    /// Upper bound on the placements a single suggestion may expand to.
    pub max_placements: usize,
    /// Demonstrated offsets within this distance (mm) of a lattice step
    /// count as consistent with it.
    pub step_tolerance: f64,
}

impl Default for PatternConfig {
    fn default() -> Self {
        PatternConfig {
            max_placements: 400,
            step_tolerance: 0.01,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineConfig {
    pub region: RegionConfig,
    pub texture: TextureConfig,
    pub pattern: PatternConfig,
}

#[derive(Debug, Error)]
#[error("config: {0}")]
pub struct ConfigError(String);

impl EngineConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults() {
        let c = EngineConfig::from_toml("[region]\nk = 4\n[texture]\nmin_wall = 1.2\n").unwrap();
        assert_eq!(c.region.k, 4);
        assert_eq!(c.region.threshold, 0.15);
        assert_eq!(c.texture.min_wall, 1.2);
        assert_eq!(c.pattern, PatternConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(EngineConfig::from_toml("[region]\nradius = 3\n").is_err());
    }
}
