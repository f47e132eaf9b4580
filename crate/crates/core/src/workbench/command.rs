use crate::mesh::MeshFormat;
use crate::pattern::SuggestionEdits;
use crate::surface_map::Vec2;
use crate::texture::TextureStyle;
use serde::{Deserialize, Serialize};

/// One entry of the project log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Command {
    pub id: u64,
    #[serde(flatten)]
    pub op: Op,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Op {
    ImportMesh(MeshData),
    AddElement(ElementData),
    SelectRegion(RegionQuery),
    Place(PlaceData),
    Paste(PlaceData),
    Suggest(SuggestData),
    Adjust(AdjustData),
    Accept(SuggestionRef),
    Dismiss(SuggestionRef),
    SetStyle(TextureStyle),
    Apply(SuggestionRef),
    Export(ExportData),
    Undo,
    Redo,
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::ImportMesh(_) => "IMPORT_MESH",
            Op::AddElement(_) => "ADD_ELEMENT",
            Op::SelectRegion(_) => "SELECT_REGION",
            Op::Place(_) => "PLACE",
            Op::Paste(_) => "PASTE",
            Op::Suggest(_) => "SUGGEST",
            Op::Adjust(_) => "ADJUST",
            Op::Accept(_) => "ACCEPT",
            Op::Dismiss(_) => "DISMISS",
            Op::SetStyle(_) => "SET_STYLE",
            Op::Apply(_) => "APPLY",
            Op::Export(_) => "EXPORT",
            Op::Undo => "UNDO",
            Op::Redo => "REDO",
        }
    }

    /// Whether the op changes project state. Read-only ops are not logged.
    pub fn mutates(&self) -> bool {
        !matches!(self, Op::Export(_))
    }
}

/// Mesh file contents, base64 encoded so the log is self-contained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshData {
    pub format: MeshFormat,
    pub data: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementData {
    pub name: String,
    #[serde(flatten)]
    pub source: ElementInput,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementInput {
    Svg {
        svg: String,
    },
    Polygon {
        outer: Vec<[f64; 2]>,
        #[serde(default)]
        holes: Vec<Vec<[f64; 2]>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionQuery {
    Cursor { cursor: [f64; 3] },
    Faces { faces: Vec<u32> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaceData {
    /// Element name; defaults to the last added one for PLACE and the
    /// clipboard for PASTE.
    #[serde(default)]
    pub element: Option<String>,
    pub point: [f64; 3],
    /// Radians.
    #[serde(default)]
    pub rotation: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PatternKind {
    Lattice,
    Path,
}

/// Explicit pattern request. Without `u_step` the last two pastes are
/// used as the demonstration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuggestData {
    pub kind: PatternKind,
    #[serde(default)]
    pub u_step: Option<Vec2>,
    #[serde(default)]
    pub v_step: Option<Vec2>,
    #[serde(default)]
    pub counts: Option<[usize; 2]>,
    #[serde(default)]
    pub stroke: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustData {
    pub suggestion: usize,
    pub edits: SuggestionEdits,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionRef {
    pub suggestion: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportData {
    pub format: MeshFormat,
}

/// A delta pushed to the client.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub kind: EventKind,
    pub payload: serde_json::Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    MeshImported,
    ElementAdded,
    RegionSelected,
    Placed,
    SuggestionCreated,
    SuggestionUpdated,
    SuggestionAccepted,
    SuggestionDismissed,
    NoSuggestion,
    StyleSet,
    MeshUpdated,
    Exported,
    /// Undo or redo replaced the whole state; clients resync from the payload.
    StateRestored,
}

impl Event {
    pub fn new(kind: EventKind, payload: serde_json::Value) -> Self {
        Event { kind, payload }
    }
}
