use crate::config::ConfigError;
use crate::mesh::MeshError;
use crate::pattern::PatternError;
use crate::region::RegionError;
use crate::surface_map::MapError;
use crate::texture::TextureError;
use crate::workbench::{ProjectError, SpecError};
use std::path::PathBuf;
use thiserror::Error;

/// Any failure the engine reports to the outside world.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("mesh: {0}")]
    Mesh(#[from] MeshError),
    #[error("region: {0}")]
    Region(#[from] RegionError),
    #[error("surface map: {0}")]
    Map(#[from] MapError),
    #[error("pattern: {0}")]
    Pattern(#[from] PatternError),
    #[error("texture: {0}")]
    Texture(#[from] TextureError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("project: {0}")]
    Project(#[from] ProjectError),
}

/// Coarse failure class, used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Missing, unreadable or unparsable input.
    Input,
    /// Input parsed but its values are rejected.
    Validation,
    /// The computation itself failed.
    Processing,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Input => 2,
            ErrorClass::Validation => 3,
            ErrorClass::Processing => 4,
        }
    }
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io { .. } => "IO",
            Error::Mesh(e) => match e {
                MeshError::Parse { .. } => "MESH_PARSE",
                MeshError::Empty => "MESH_EMPTY",
                MeshError::NotWatertight(_) => "MESH_NOT_WATERTIGHT",
                _ => "MESH_INVALID",
            },
            Error::Region(e) => match e {
                RegionError::NoHit { .. } => "REGION_NO_HIT",
                RegionError::Cancelled => "REGION_CANCELLED",
                RegionError::FaceList { .. } => "REGION_FACE_LIST",
                RegionError::InvalidParameter(_) => "REGION_INVALID_PARAMETER",
                _ => "REGION_FAILED",
            },
            Error::Map(e) => match e {
                MapError::InvalidPlacement(_) => "MAP_INVALID_PLACEMENT",
                MapError::LeftRegion { .. } | MapError::MeshBoundary { .. } => "MAP_LEFT_REGION",
                _ => "MAP_FAILED",
            },
            Error::Pattern(e) => match e {
                PatternError::InvalidStep(_) | PatternError::DependentSteps => "PATTERN_INVALID_STEP",
                PatternError::InvalidEdit(_) => "PATTERN_INVALID_EDIT",
                PatternError::NotPending(_) => "PATTERN_NOT_PENDING",
                PatternError::RegionTooSmall => "PATTERN_REGION_TOO_SMALL",
                PatternError::EmptyStroke => "PATTERN_EMPTY_STROKE",
                PatternError::TimestampOrder { .. } => "PATTERN_TIMESTAMP_ORDER",
                PatternError::Map(_) => "PATTERN_MAP",
            },
            Error::Texture(e) => match e {
                TextureError::Svg(_) | TextureError::UnsupportedSvg(_) | TextureError::OpenPath => "SVG_INVALID",
                TextureError::InvalidElement(_) | TextureError::SelfIntersection { .. } => "ELEMENT_INVALID",
                TextureError::InvalidStyle(_) => "STYLE_INVALID",
                TextureError::Overlap { .. } => "TEXTURE_OVERLAP",
                TextureError::NotFit { .. } => "TEXTURE_NOT_FIT",
                TextureError::SelfIntersectingOffset { .. } => "TEXTURE_SELF_INTERSECTION",
                TextureError::RecessTooDeep { .. } => "TEXTURE_RECESS_TOO_DEEP",
                TextureError::NotWatertight(_) => "TEXTURE_NOT_WATERTIGHT",
                TextureError::NotAccepted => "TEXTURE_NOT_ACCEPTED",
                TextureError::Triangulation(_) | TextureError::Map(_) | TextureError::Mesh(_) => "TEXTURE_FAILED",
            },
            Error::Config(_) => "CONFIG_INVALID",
            Error::Spec(_) => "SPEC_INVALID",
            Error::Project(e) => e.code(),
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Io { .. } => ErrorClass::Input,
            Error::Mesh(MeshError::Parse { .. } | MeshError::Empty) => ErrorClass::Input,
            Error::Texture(TextureError::Svg(_) | TextureError::UnsupportedSvg(_) | TextureError::OpenPath) => {
                ErrorClass::Input
            }
            Error::Region(RegionError::FaceList { .. }) => ErrorClass::Input,
            Error::Project(ProjectError::Corrupt(_) | ProjectError::UnsupportedVersion { .. }) => ErrorClass::Input,
            Error::Config(_) | Error::Spec(_) => ErrorClass::Validation,
            Error::Pattern(PatternError::InvalidStep(_) | PatternError::InvalidEdit(_) | PatternError::DependentSteps) => {
                ErrorClass::Validation
            }
            Error::Texture(
                TextureError::InvalidElement(_) | TextureError::SelfIntersection { .. } | TextureError::InvalidStyle(_),
            ) => ErrorClass::Validation,
            _ => ErrorClass::Processing,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}
