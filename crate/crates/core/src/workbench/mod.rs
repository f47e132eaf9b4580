//! Editing sessions: an append-only command log, undo and redo, project
//! files, the batch pattern spec and the line-JSON protocol.

mod batch;
mod command;
mod persist;
mod project;
mod session;
mod spec;

pub use batch::{run_apply, spec_ops, ApplyOptions, ApplyReport};
pub use command::*;
pub use persist::{load_project, project_from_json, project_to_json, save_project, ProjectFile, SCHEMA_VERSION};
pub use project::{exported_bytes, Applied, NamedElement, Project, RegionEntry, State, SuggestionEntry};
pub use session::{serve, PreviewWorker, Session};
pub use spec::{PatternSpec, RegionSource, SpecError, SpecPattern};

use thiserror::Error;

/// Rejections raised by the session itself rather than an engine module.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProjectError {
    #[error("command id {got} is not above the last logged id (next is {next})")]
    IdOrder { got: u64, next: u64 },
    #[error("no mesh imported")]
    NoMesh,
    #[error("no element added")]
    NoElement,
    #[error("nothing has been placed yet")]
    NoPlacement,
    #[error("nothing copied to paste")]
    EmptyClipboard,
    #[error("the last placements do not demonstrate a repetition")]
    NoRepetition,
    #[error("unknown element {0:?}")]
    UnknownElement(String),
    #[error("element {0:?} already exists")]
    DuplicateElement(String),
    #[error("unknown suggestion {0}")]
    UnknownSuggestion(usize),
    #[error("suggestion {0} belongs to an earlier mesh revision")]
    StaleSuggestion(usize),
    #[error("nothing to undo")]
    NothingToUndo,
    #[error("nothing to redo")]
    NothingToRedo,
    #[error("invalid payload: {0}")]
    InvalidPayload(String),
    #[error("schema version {found} is not supported (this build reads {supported})")]
    UnsupportedVersion { found: u32, supported: u32 },
    #[error("corrupt project file: {0}")]
    Corrupt(String),
}

impl ProjectError {
    pub fn code(&self) -> &'static str {
        match self {
            ProjectError::IdOrder { .. } => "COMMAND_ID_ORDER",
            ProjectError::NoMesh => "NO_MESH",
            ProjectError::NoElement => "NO_ELEMENT",
            ProjectError::NoPlacement => "NO_PLACEMENT",
            ProjectError::EmptyClipboard => "EMPTY_CLIPBOARD",
            ProjectError::NoRepetition => "NO_REPETITION",
            ProjectError::UnknownElement(_) => "UNKNOWN_ELEMENT",
            ProjectError::DuplicateElement(_) => "DUPLICATE_ELEMENT",
            ProjectError::UnknownSuggestion(_) => "UNKNOWN_SUGGESTION",
            ProjectError::StaleSuggestion(_) => "STALE_SUGGESTION",
            ProjectError::NothingToUndo => "NOTHING_TO_UNDO",
            ProjectError::NothingToRedo => "NOTHING_TO_REDO",
            ProjectError::InvalidPayload(_) => "INVALID_PAYLOAD",
            ProjectError::UnsupportedVersion { .. } => "UNSUPPORTED_VERSION",
            ProjectError::Corrupt(_) => "CORRUPT_PROJECT",
        }
    }
}
