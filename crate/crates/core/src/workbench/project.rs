use super::command::*;
use super::ProjectError;
use crate::config::EngineConfig;
use crate::error::Error;
use crate::mesh::{check_watertight, load_mesh, save_mesh, signed_volume_unchecked, TriangleMesh};
use crate::pattern::{
    adjust_suggestion, detect_repetition, extrapolate_lattice, extrapolate_path, record_placement, respond_to_paste,
    ElementId, Expander, HistoryEntry, OpKind, PasteResponse, PatternSuggestion, PlacementHistory, RepetitionSeed,
    SuggestionStatus,
};
use crate::region::{closest_face, infer_region, CancelToken, RegionError, SurfaceRegion};
use crate::surface_map::{Placement, SurfaceMap, SurfacePoint, Vec2};
use crate::texture::{apply_pattern, parse_svg_element, ElementSource, TextureElement, TextureStyle};
use crate::{Execution, Point};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::Serialize;
use serde_json::json;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedElement {
    pub name: String,
    pub element: TextureElement,
}

/// A region together with the mesh revision it indexes into.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionEntry {
    pub region: SurfaceRegion,
    pub revision: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuggestionEntry {
    pub suggestion: PatternSuggestion,
    /// Region the suggestion was expanded in; `None` is the whole mesh.
    pub region: Option<usize>,
    pub revision: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Applied {
    pub suggestion: usize,
    pub style: TextureStyle,
}

/// Everything derived from the command log at one point in time.
///
/// The mesh revision counts applied patterns since the last import. Faces
/// are renumbered by every apply, so regions and suggestions from older
/// revisions stay listed but can no longer be used.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub base_mesh: Option<Arc<TriangleMesh>>,
    pub mesh: Option<Arc<TriangleMesh>>,
    pub revision: usize,
    pub elements: Vec<NamedElement>,
    pub history: PlacementHistory,
    pub regions: Vec<RegionEntry>,
    pub active_region: Option<usize>,
    pub suggestions: Vec<SuggestionEntry>,
    pub applied: Vec<Applied>,
    pub style: TextureStyle,
    pub clipboard: Option<ElementId>,
}

impl Default for State {
    fn default() -> Self {
        State {
            base_mesh: None,
            mesh: None,
            revision: 0,
            elements: Vec::new(),
            history: PlacementHistory::new(),
            regions: Vec::new(),
            active_region: None,
            suggestions: Vec::new(),
            applied: Vec::new(),
            style: TextureStyle::raised(1.0).expect("valid default style"),
            clipboard: None,
        }
    }
}

impl State {
    pub fn mesh(&self) -> Result<&Arc<TriangleMesh>, ProjectError> {
        self.mesh.as_ref().ok_or(ProjectError::NoMesh)
    }

    /// Index of the newest pending suggestion on the current mesh.
    pub fn pending(&self) -> Option<usize> {
        self.suggestions
            .iter()
            .rposition(|e| e.revision == self.revision && e.suggestion.status == SuggestionStatus::Pending)
    }

    /// Summary sent to clients after undo, redo and load.
    pub fn summary(&self) -> serde_json::Value {
        json!({
            "mesh": self.mesh.as_deref().map(mesh_summary),
            "revision": self.revision,
            "elements": self.elements.iter().map(|e| &e.name).collect::<Vec<_>>(),
            "placements": self.history.len(),
            "regions": self.regions.len(),
            "active_region": self.active_region,
            "suggestions": self.suggestions.iter().map(|e| e.suggestion.status).collect::<Vec<_>>(),
            "applied": self.applied,
            "style": self.style,
        })
    }
}

fn mesh_summary(m: &TriangleMesh) -> serde_json::Value {
    json!({
        "vertices": m.num_vertices(),
        "faces": m.num_faces(),
        "volume": signed_volume_unchecked(m),
        "watertight": check_watertight(m).is_watertight(),
    })
}

/// An event-sourced editing session: the command log is the source of
/// truth, and every state it passed through is kept for undo.
#[derive(Debug, Clone)]
pub struct Project {
    config: EngineConfig,
    exec: Execution,
    log: Vec<Command>,
    done: Vec<State>,
    undone: Vec<State>,
}

impl Project {
    pub fn new(config: EngineConfig, exec: Execution) -> Self {
        Project {
            config,
            exec,
            log: Vec::new(),
            done: vec![State::default()],
            undone: Vec::new(),
        }
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    pub fn execution(&self) -> Execution {
        self.exec
    }

    pub fn log(&self) -> &[Command] {
        &self.log
    }

    pub fn state(&self) -> &State {
        self.done.last().expect("initial state is never popped")
    }

    pub fn next_id(&self) -> u64 {
        self.log.last().map_or(1, |c| c.id + 1)
    }

    /// Executes `op` under the next free id.
    pub fn submit(&mut self, op: Op) -> Result<Vec<Event>, Error> {
        let id = self.next_id();
        self.execute(Command { id, op })
    }

    /// Runs one command. On error the project is left untouched and the
    /// command is not logged.
    pub fn execute(&mut self, cmd: Command) -> Result<Vec<Event>, Error> {
        let next = self.next_id();
        if cmd.id < next {
            return Err(ProjectError::IdOrder { got: cmd.id, next }.into());
        }
        let events = match &cmd.op {
            Op::Undo => {
                if self.done.len() < 2 {
                    return Err(ProjectError::NothingToUndo.into());
                }
                let s = self.done.pop().expect("checked length");
                self.undone.push(s);
                vec![Event::new(EventKind::StateRestored, self.state().summary())]
            }
            Op::Redo => {
                let s = self.undone.pop().ok_or(ProjectError::NothingToRedo)?;
                self.done.push(s);
                vec![Event::new(EventKind::StateRestored, self.state().summary())]
            }
            Op::Export(e) => return export(self.state(), e.format),
            op => {
                let mut state = self.state().clone();
                let events = Step {
                    config: &self.config,
                    exec: self.exec,
                    id: cmd.id,
                }
                .run(&mut state, op)?;
                self.done.push(state);
                self.undone.clear();
                events
            }
        };
        self.log.push(cmd);
        Ok(events)
    }
}

fn export(state: &State, format: crate::mesh::MeshFormat) -> Result<Vec<Event>, Error> {
    let bytes = save_mesh(state.mesh()?, format)?;
    Ok(vec![Event::new(
        EventKind::Exported,
        json!({ "format": format, "bytes": bytes.len(), "data": B64.encode(&bytes) }),
    )])
}

/// Decodes the payload of an EXPORTED event.
pub fn exported_bytes(event: &Event) -> Option<Vec<u8>> {
    if event.kind != EventKind::Exported {
        return None;
    }
    B64.decode(event.payload.get("data")?.as_str()?).ok()
}

struct Step<'c> {
    config: &'c EngineConfig,
    exec: Execution,
    id: u64,
}

impl Step<'_> {
    fn run(&self, s: &mut State, op: &Op) -> Result<Vec<Event>, Error> {
        match op {
            Op::ImportMesh(d) => self.import(s, d),
            Op::AddElement(d) => self.add_element(s, d),
            Op::SelectRegion(q) => self.select_region(s, q),
            Op::Place(d) => self.place(s, d, OpKind::Manual),
            Op::Paste(d) => self.place(s, d, OpKind::Paste),
            Op::Suggest(d) => self.suggest(s, d),
            Op::Adjust(d) => self.adjust(s, d),
            Op::Accept(r) => self.settle(s, r.suggestion, true),
            Op::Dismiss(r) => self.settle(s, r.suggestion, false),
            Op::SetStyle(style) => {
                style.validate(self.config.texture.min_wall).map_err(Error::from)?;
                s.style = *style;
                Ok(vec![Event::new(EventKind::StyleSet, json!(style))])
            }
            Op::Apply(r) => self.apply(s, r.suggestion),
            Op::Export(_) | Op::Undo | Op::Redo => unreachable!("handled by Project::execute"),
        }
    }

    fn import(&self, s: &mut State, d: &MeshData) -> Result<Vec<Event>, Error> {
        let bytes = B64
            .decode(&d.data)
            .map_err(|e| ProjectError::InvalidPayload(format!("mesh data: {e}")))?;
        let mesh = Arc::new(load_mesh(&bytes, d.format)?);
        let elements = std::mem::take(&mut s.elements);
        *s = State {
            base_mesh: Some(mesh.clone()),
            mesh: Some(mesh.clone()),
            elements,
            style: s.style,
            ..State::default()
        };
        Ok(vec![Event::new(EventKind::MeshImported, mesh_summary(&mesh))])
    }

    fn add_element(&self, s: &mut State, d: &ElementData) -> Result<Vec<Event>, Error> {
        if d.name.is_empty() {
            return Err(ProjectError::InvalidPayload("element name is empty".into()).into());
        }
        if s.elements.iter().any(|e| e.name == d.name) {
            return Err(ProjectError::DuplicateElement(d.name.clone()).into());
        }
        let element = match &d.source {
            ElementInput::Svg { svg } => parse_svg_element(svg.as_bytes(), self.config.texture.chordal_tolerance)?,
            ElementInput::Polygon { outer, holes } => {
                let ring = |r: &Vec<[f64; 2]>| r.iter().map(|p| Vec2::new(p[0], p[1])).collect::<Vec<_>>();
                TextureElement::new(ring(outer), holes.iter().map(ring).collect(), ElementSource::Sketch)?
            }
        };
        let payload = json!({
            "element": s.elements.len(),
            "name": d.name,
            "area": element.area(),
            "outer": element.outer,
            "holes": element.holes,
        });
        s.elements.push(NamedElement {
            name: d.name.clone(),
            element,
        });
        Ok(vec![Event::new(EventKind::ElementAdded, payload)])
    }

    fn select_region(&self, s: &mut State, q: &RegionQuery) -> Result<Vec<Event>, Error> {
        let mesh = s.mesh()?.clone();
        let region = match q {
            RegionQuery::Cursor { cursor } => infer_region(
                &mesh,
                Point::from(*cursor),
                &self.config.region,
                &CancelToken::new(),
                self.exec,
            )?,
            RegionQuery::Faces { faces } => {
                let topo = mesh.topology();
                let r = SurfaceRegion::from_faces(&mesh, &topo, faces.iter().copied());
                r.validate(&mesh, &topo).map_err(ProjectError::InvalidPayload)?;
                r
            }
        };
        let id = s.regions.len();
        let payload = json!({ "region": id, "faces": region.faces() });
        s.regions.push(RegionEntry {
            region,
            revision: s.revision,
        });
        s.active_region = Some(id);
        Ok(vec![Event::new(EventKind::RegionSelected, payload)])
    }

    fn element_id(&self, s: &State, name: Option<&str>, kind: OpKind) -> Result<ElementId, ProjectError> {
        match name {
            Some(n) => s
                .elements
                .iter()
                .position(|e| e.name == n)
                .map(|i| ElementId(i as u32))
                .ok_or_else(|| ProjectError::UnknownElement(n.to_string())),
            None => match kind {
                OpKind::Paste => s.clipboard.ok_or(ProjectError::EmptyClipboard),
                OpKind::Manual => s
                    .elements
                    .len()
                    .checked_sub(1)
                    .map(|i| ElementId(i as u32))
                    .ok_or(ProjectError::NoElement),
            },
        }
    }

    fn surface_point(&self, mesh: &TriangleMesh, p: [f64; 3]) -> Result<SurfacePoint, Error> {
        let q = Point::from(p);
        let tol = self.config.region.hit_tolerance_fraction * mesh.bounding_diagonal();
        match closest_face(mesh, &q, self.exec) {
            Some((face, bary, d)) if d <= tol => Ok(SurfacePoint::new_clamped(face, bary)),
            _ => Err(RegionError::NoHit {
                x: p[0],
                y: p[1],
                z: p[2],
            }
            .into()),
        }
    }

    fn active_region<'s>(&self, s: &'s State) -> Option<(usize, &'s SurfaceRegion)> {
        let id = s.active_region?;
        let e = &s.regions[id];
        (e.revision == s.revision).then_some((id, &e.region))
    }

    fn place(&self, s: &mut State, d: &PlaceData, kind: OpKind) -> Result<Vec<Event>, Error> {
        let mesh = s.mesh()?.clone();
        let element = self.element_id(s, d.element.as_deref(), kind)?;
        let anchor = self.surface_point(&mesh, d.point)?;
        let placement = Placement::new(anchor, d.rotation, d.scale)?;
        s.history = record_placement(
            &s.history,
            HistoryEntry {
                placement,
                element,
                kind,
                timestamp: self.id,
            },
        )?;
        s.clipboard = Some(element);
        let mut events = vec![Event::new(
            EventKind::Placed,
            json!({
                "index": s.history.len() - 1,
                "element": element.0,
                "paste": kind == OpKind::Paste,
                "point": Point::from(d.point),
                "rotation": d.rotation,
                "scale": d.scale,
            }),
        )];
        if kind == OpKind::Paste {
            events.extend(self.paste_response(s, &mesh)?);
        }
        Ok(events)
    }

    fn paste_response(&self, s: &mut State, mesh: &TriangleMesh) -> Result<Vec<Event>, Error> {
        let region = self.active_region(s).map(|(i, r)| (i, r.clone()));
        let map = surface_map(mesh, region.as_ref().map(|r| &r.1))?;
        let pending = s.pending();
        let response = respond_to_paste(
            pending.map(|i| &s.suggestions[i].suggestion),
            &s.history,
            &map,
            self.config.pattern.step_tolerance,
        );
        let (seed, v_step, replace) = match response {
            PasteResponse::Nothing | PasteResponse::Consistent => return Ok(Vec::new()),
            PasteResponse::New(seed) => (seed, None, None),
            PasteResponse::Upgrade { seed, v_step } => (seed, Some(v_step), pending),
        };
        let element = &s.elements[seed.element.0 as usize].element;
        let ex = self.expander(&map, element);
        let counts = replace.and_then(|i| s.suggestions[i].suggestion.counts);
        match extrapolate_lattice(&ex, &seed, v_step, counts) {
            Ok(sugg) => Ok(match replace {
                Some(i) => {
                    s.suggestions[i].suggestion = sugg;
                    vec![Event::new(EventKind::SuggestionUpdated, suggestion_payload(i, &s.suggestions[i], &map))]
                }
                None => push_suggestion(s, sugg, region.map(|r| r.0), &map),
            }),
            Err(e) => Ok(vec![Event::new(
                EventKind::NoSuggestion,
                json!({ "reason": e.to_string(), "code": Error::from(e).code() }),
            )]),
        }
    }

    fn expander<'m, 'a>(&self, map: &'m SurfaceMap<'a>, element: &TextureElement) -> Expander<'m, 'a> {
        Expander {
            map,
            footprint: element.outer.clone(),
            config: self.config.pattern.clone(),
            exec: self.exec,
        }
    }

    fn suggest(&self, s: &mut State, d: &SuggestData) -> Result<Vec<Event>, Error> {
        let mesh = s.mesh()?.clone();
        let region = self.active_region(s).map(|(i, r)| (i, r.clone()));
        let map = surface_map(&mesh, region.as_ref().map(|r| &r.1))?;
        let last = s.history.last().ok_or(ProjectError::NoPlacement)?;
        let seed = match d.u_step {
            Some(u) => RepetitionSeed::from_base(last.element, last.placement, u),
            None => detect_repetition(&s.history, &map).ok_or(ProjectError::NoRepetition)?,
        };
        let element = &s.elements[seed.element.0 as usize].element;
        let ex = self.expander(&map, element);
        let sugg = match d.kind {
            PatternKind::Lattice => extrapolate_lattice(&ex, &seed, d.v_step, d.counts)?,
            PatternKind::Path => {
                let stroke = d
                    .stroke
                    .iter()
                    .map(|&p| self.surface_point(&mesh, p))
                    .collect::<Result<Vec<_>, _>>()?;
                extrapolate_path(&ex, &seed, &stroke)?
            }
        };
        Ok(push_suggestion(s, sugg, region.map(|r| r.0), &map))
    }

    fn current_suggestion(&self, s: &State, id: usize) -> Result<(), ProjectError> {
        let e = s.suggestions.get(id).ok_or(ProjectError::UnknownSuggestion(id))?;
        if e.revision != s.revision {
            return Err(ProjectError::StaleSuggestion(id));
        }
        Ok(())
    }

    fn adjust(&self, s: &mut State, d: &AdjustData) -> Result<Vec<Event>, Error> {
        self.current_suggestion(s, d.suggestion)?;
        let mesh = s.mesh()?.clone();
        let entry = &s.suggestions[d.suggestion];
        let region = entry.region.map(|i| &s.regions[i].region);
        let map = surface_map(&mesh, region)?;
        let element = &s.elements[entry.suggestion.element.0 as usize].element;
        let ex = self.expander(&map, element);
        let sugg = adjust_suggestion(&ex, &entry.suggestion, &d.edits)?;
        s.suggestions[d.suggestion].suggestion = sugg;
        Ok(vec![Event::new(
            EventKind::SuggestionUpdated,
            suggestion_payload(d.suggestion, &s.suggestions[d.suggestion], &map),
        )])
    }

    fn settle(&self, s: &mut State, id: usize, accept: bool) -> Result<Vec<Event>, Error> {
        self.current_suggestion(s, id)?;
        let e = &mut s.suggestions[id];
        e.suggestion = if accept {
            e.suggestion.accept()?
        } else {
            e.suggestion.dismiss()?
        };
        let kind = if accept {
            EventKind::SuggestionAccepted
        } else {
            EventKind::SuggestionDismissed
        };
        Ok(vec![Event::new(kind, json!({ "suggestion": id }))])
    }

    fn apply(&self, s: &mut State, id: usize) -> Result<Vec<Event>, Error> {
        self.current_suggestion(s, id)?;
        let mesh = s.mesh()?.clone();
        let entry = &s.suggestions[id];
        let region = match entry.region {
            Some(i) => s.regions[i].region.clone(),
            None => SurfaceRegion::whole(&mesh),
        };
        let element = &s.elements[entry.suggestion.element.0 as usize].element;
        let out = apply_pattern(
            &mesh,
            &region,
            &entry.suggestion,
            element,
            &s.style,
            &self.config.texture,
            self.exec,
        )?;
        let placements = entry.suggestion.expanded.len();
        let mut events = Vec::new();
        for (i, e) in s.suggestions.iter_mut().enumerate() {
            if e.revision == s.revision && e.suggestion.status == SuggestionStatus::Pending {
                e.suggestion.status = SuggestionStatus::Dismissed;
                events.push(Event::new(EventKind::SuggestionDismissed, json!({ "suggestion": i })));
            }
        }
        s.applied.push(Applied {
            suggestion: id,
            style: s.style,
        });
        s.mesh = Some(Arc::new(out));
        s.revision += 1;
        s.history = PlacementHistory::new();
        s.active_region = None;
        let mut payload = mesh_summary(s.mesh()?);
        payload["suggestion"] = json!(id);
        payload["placements"] = json!(placements);
        payload["revision"] = json!(s.revision);
        events.push(Event::new(EventKind::MeshUpdated, payload));
        Ok(events)
    }
}

fn surface_map<'a>(mesh: &'a TriangleMesh, region: Option<&SurfaceRegion>) -> Result<SurfaceMap<'a>, Error> {
    let map = SurfaceMap::new(mesh)?;
    Ok(match region {
        Some(r) => map.with_region(r),
        None => map,
    })
}

/// Makes `sugg` the pending suggestion, dismissing the previous one.
fn push_suggestion(s: &mut State, sugg: PatternSuggestion, region: Option<usize>, map: &SurfaceMap) -> Vec<Event> {
    let mut events = Vec::new();
    if let Some(i) = s.pending() {
        s.suggestions[i].suggestion.status = SuggestionStatus::Dismissed;
        events.push(Event::new(EventKind::SuggestionDismissed, json!({ "suggestion": i })));
    }
    let id = s.suggestions.len();
    s.suggestions.push(SuggestionEntry {
        suggestion: sugg,
        region,
        revision: s.revision,
    });
    events.push(Event::new(
        EventKind::SuggestionCreated,
        suggestion_payload(id, &s.suggestions[id], map),
    ));
    events
}

/// Shadow geometry for the client: one point, normal and frame per placement.
fn suggestion_payload(id: usize, e: &SuggestionEntry, map: &SurfaceMap) -> serde_json::Value {
    let s = &e.suggestion;
    let placements: Vec<_> = s
        .expanded
        .iter()
        .map(|p| match map.local_frame(p) {
            Ok(f) => json!({
                "point": f.origin,
                "normal": f.n,
                "e1": f.e1,
                "rotation": p.rotation,
                "scale": p.scale,
            }),
            Err(_) => json!({ "point": map.position(&p.anchor) }),
        })
        .collect();
    json!({
        "suggestion": id,
        "kind": s.kind,
        "status": s.status,
        "element": s.element.0,
        "region": e.region,
        "u_step": s.u_step,
        "v_step": s.v_step,
        "placements": placements,
    })
}
