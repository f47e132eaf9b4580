//! Pattern auto-completion: watches placements, spots copy-paste
//! repetition, and expands it into lattice or path suggestions.

mod expand;

pub use expand::{adjust_suggestion, extrapolate_lattice, extrapolate_path, Expander, SuggestionEdits};

use crate::surface_map::{MapError, Placement, SurfaceMap, Vec2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("timestamp {got} is earlier than the last recorded {last}")]
    TimestampOrder { last: u64, got: u64 },
    #[error("invalid step: {0}")]
    InvalidStep(String),
    #[error("lattice steps are linearly dependent")]
    DependentSteps,
    #[error("region too small for the demonstrated placements")]
    RegionTooSmall,
    #[error("suggestion is {0:?}, expected pending")]
    NotPending(SuggestionStatus),
    #[error("invalid edit: {0}")]
    InvalidEdit(String),
    #[error("stroke has zero length")]
    EmptyStroke,
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Index into a project's element list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ElementId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum OpKind {
    Manual,
    Paste,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub placement: Placement,
    pub element: ElementId,
    pub kind: OpKind,
    pub timestamp: u64,
}

/// Placements in the order the user made them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PlacementHistory {
    entries: Vec<HistoryEntry>,
}

impl PlacementHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn last(&self) -> Option<&HistoryEntry> {
        self.entries.last()
    }
}

/// Returns `history` with `entry` appended.
pub fn record_placement(history: &PlacementHistory, entry: HistoryEntry) -> Result<PlacementHistory, PatternError> {
    entry.placement.validate()?;
    if let Some(last) = history.last() {
        if entry.timestamp < last.timestamp {
            return Err(PatternError::TimestampOrder {
                last: last.timestamp,
                got: entry.timestamp,
            });
        }
    }
    let mut out = history.clone();
    out.entries.push(entry);
    Ok(out)
}

/// A demonstrated placement and its lattice index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Demo {
    pub index: [i64; 2],
    pub placement: Placement,
}

/// Base placement plus the offset to its copy, in the unrotated tangent
/// frame of the base.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionSeed {
    pub element: ElementId,
    pub base: Placement,
    pub step: Vec2,
    /// Placements the user made themselves, base first.
    pub demos: Vec<Demo>,
}

impl RepetitionSeed {
    /// A seed with only the base demonstrated, for patterns given up front.
    pub fn from_base(element: ElementId, base: Placement, step: Vec2) -> Self {
        RepetitionSeed {
            element,
            base,
            step,
            demos: vec![Demo {
                index: [0, 0],
                placement: base,
            }],
        }
    }
}

/// Seed from the last two entries when the newest is a paste of the same
/// element at a different spot.
pub fn detect_repetition(history: &PlacementHistory, map: &SurfaceMap) -> Option<RepetitionSeed> {
    let [.., a, b] = history.entries() else {
        return None;
    };
    if b.kind != OpKind::Paste || a.element != b.element {
        return None;
    }
    let frame = map.base_frame(a.placement.anchor).ok()?;
    let step = map.log_point(&frame, &b.placement.anchor)?;
    if step.norm() <= 1e-9 {
        return None;
    }
    Some(RepetitionSeed {
        element: a.element,
        base: a.placement,
        step,
        demos: vec![
            Demo {
                index: [0, 0],
                placement: a.placement,
            },
            Demo {
                index: [1, 0],
                placement: b.placement,
            },
        ],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SuggestionKind {
    Lattice1d,
    Lattice2d,
    Path,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SuggestionStatus {
    Pending,
    Accepted,
    Dismissed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSuggestion {
    pub kind: SuggestionKind,
    pub element: ElementId,
    pub base: Placement,
    pub u_step: Vec2,
    pub v_step: Option<Vec2>,
    /// Stroke for path suggestions.
    pub path: Vec<crate::surface_map::SurfacePoint>,
    pub spacing: Option<f64>,
    /// Optional cap on lattice indices per direction.
    pub counts: Option<[usize; 2]>,
    pub demos: Vec<Demo>,
    pub expanded: Vec<Placement>,
    pub status: SuggestionStatus,
}

impl PatternSuggestion {
    /// Marks a pending suggestion as accepted.
    pub fn accept(&self) -> Result<PatternSuggestion, PatternError> {
        self.settle(SuggestionStatus::Accepted)
    }

    /// Marks a pending suggestion as dismissed.
    pub fn dismiss(&self) -> Result<PatternSuggestion, PatternError> {
        self.settle(SuggestionStatus::Dismissed)
    }

    fn settle(&self, status: SuggestionStatus) -> Result<PatternSuggestion, PatternError> {
        if self.status != SuggestionStatus::Pending {
            return Err(PatternError::NotPending(self.status));
        }
        Ok(PatternSuggestion {
            status,
            ..self.clone()
        })
    }
}

/// What a new paste means for the pending suggestion.
#[derive(Debug, Clone, PartialEq)]
pub enum PasteResponse {
    /// Not a repetition.
    Nothing,
    /// Lands on the pending lattice; nothing changes.
    Consistent,
    /// Starts a fresh one-directional seed.
    New(RepetitionSeed),
    /// Adds a second direction to the pending one-directional lattice.
    Upgrade { seed: RepetitionSeed, v_step: Vec2 },
}

/// Decides how the newest history entry relates to `pending`.
///
/// A paste that sits on an integer multiple of the pending step is
/// consistent. One that sits off the line adds a second direction, taken
/// as its offset minus the nearest multiple of the first step. Anything
/// else replaces the seed with the last two entries.
pub fn respond_to_paste(
    pending: Option<&PatternSuggestion>,
    history: &PlacementHistory,
    map: &SurfaceMap,
    tolerance: f64,
) -> PasteResponse {
    let Some(last) = history.last() else {
        return PasteResponse::Nothing;
    };
    if last.kind != OpKind::Paste {
        return PasteResponse::Nothing;
    }
    let fresh = || match detect_repetition(history, map) {
        Some(seed) => PasteResponse::New(seed),
        None => PasteResponse::Nothing,
    };
    let Some(s) = pending.filter(|s| s.status == SuggestionStatus::Pending && s.element == last.element) else {
        return fresh();
    };
    if s.kind == SuggestionKind::Path {
        return fresh();
    }
    let Some(w) = map
        .base_frame(s.base.anchor)
        .ok()
        .and_then(|f| map.log_point(&f, &last.placement.anchor))
    else {
        return fresh();
    };
    let u = s.u_step;
    match s.v_step {
        None => {
            let k = (w.dot(&u) / u.norm_squared()).round();
            let r = w - u * k;
            if r.norm() <= tolerance {
                return PasteResponse::Consistent;
            }
            // off the line by more than a tolerance in the perpendicular direction
            if (u.x * r.y - u.y * r.x).abs() / u.norm() > tolerance {
                let mut demos = s.demos.clone();
                demos.push(Demo {
                    index: [k as i64, 1],
                    placement: last.placement,
                });
                let seed = RepetitionSeed {
                    element: s.element,
                    base: s.base,
                    step: u,
                    demos,
                };
                return PasteResponse::Upgrade { seed, v_step: r };
            }
            fresh()
        }
        Some(v) => {
            let m = nalgebra::Matrix2::from_columns(&[u, v]);
            let Some(ab) = m.try_inverse().map(|inv| inv * w) else {
                return fresh();
            };
            let snapped = u * ab.x.round() + v * ab.y.round();
            if (snapped - w).norm() <= tolerance {
                PasteResponse::Consistent
            } else {
                fresh()
            }
        }
    }
}
