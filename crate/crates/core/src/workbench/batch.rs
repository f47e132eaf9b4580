use super::command::*;
use super::spec::{PatternSpec, RegionSource, SpecPattern};
use super::{exported_bytes, save_project, Project, SpecError};
use crate::config::EngineConfig;
use crate::error::Error;
use crate::mesh::{signed_volume_unchecked, MeshError, MeshFormat};
use crate::region::read_face_list;
use crate::Execution;
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use std::path::{Path, PathBuf};

/// Inputs of the batch `apply` command. Paths given here win over the
/// ones in the spec file.
#[derive(Debug, Clone, Default)]
pub struct ApplyOptions {
    pub mesh: Option<PathBuf>,
    pub element: Option<PathBuf>,
    pub spec: PathBuf,
    pub out: Option<PathBuf>,
    pub config: Option<PathBuf>,
    /// Also write the project file for the run.
    pub project: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApplyReport {
    pub output: PathBuf,
    pub placements: usize,
    pub faces: usize,
    pub volume_before: f64,
    pub volume_after: f64,
}

fn read(path: &Path) -> Result<Vec<u8>, Error> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn mesh_format(path: &Path, bytes: &[u8]) -> Result<MeshFormat, Error> {
    MeshFormat::detect(path, bytes).ok_or_else(|| {
        MeshError::Parse {
            offset: 0,
            message: format!("{}: unknown mesh extension, expected .stl or .obj", path.display()),
        }
        .into()
    })
}

/// Runs a spec end to end through a fresh project: import, element,
/// region, first placement, suggestion, accept, style, apply, export.
pub fn run_apply(opts: &ApplyOptions, exec: Execution) -> Result<ApplyReport, Error> {
    let config = match &opts.config {
        Some(p) => EngineConfig::from_toml(&String::from_utf8_lossy(&read(p)?))?,
        None => EngineConfig::default(),
    };
    let spec_text = read(&opts.spec)?;
    let base_dir = opts.spec.parent().unwrap_or(Path::new("."));
    let spec = PatternSpec::parse(&String::from_utf8_lossy(&spec_text), base_dir)?;
    let pick = |arg: &Option<PathBuf>, key: &Option<PathBuf>, name: &str| {
        arg.clone()
            .or_else(|| key.clone())
            .ok_or_else(|| Error::from(SpecError::Invalid(format!("no {name} given"))))
    };
    let mesh_path = pick(&opts.mesh, &spec.mesh, "mesh")?;
    let element_path = pick(&opts.element, &spec.element, "element")?;
    let out = pick(&opts.out, &spec.output, "output")?;

    let mesh_bytes = read(&mesh_path)?;
    let format = mesh_format(&mesh_path, &mesh_bytes)?;
    let svg = String::from_utf8(read(&element_path)?).map_err(|_| {
        Error::from(crate::texture::TextureError::Svg(format!(
            "{}: not UTF-8 text",
            element_path.display()
        )))
    })?;
    let out_format = mesh_format(&out, &[])?;

    let mut project = Project::new(config, exec);
    project.submit(Op::ImportMesh(MeshData {
        format,
        data: B64.encode(&mesh_bytes),
    }))?;
    let region = match &spec.region {
        RegionSource::Cursor(c) => Some(RegionQuery::Cursor { cursor: (*c).into() }),
        RegionSource::File(p) => {
            let text = String::from_utf8_lossy(&read(p)?).into_owned();
            let n = project.state().mesh()?.num_faces();
            Some(RegionQuery::Faces {
                faces: read_face_list(&text, n)?,
            })
        }
        RegionSource::Whole => None,
    };
    let name = element_path
        .file_stem()
        .map_or_else(|| "element".to_string(), |s| s.to_string_lossy().into_owned());
    let before = signed_volume_unchecked(project.state().mesh()?);
    for op in spec_ops(&spec, name, svg, region, out_format) {
        let events = project.submit(op)?;
        if let Some(bytes) = events.iter().find_map(exported_bytes) {
            std::fs::write(&out, bytes).map_err(|e| Error::io(&out, e))?;
        }
    }
    if let Some(p) = &opts.project {
        save_project(&project, p)?;
    }
    let state = project.state();
    let mesh = state.mesh()?;
    let applied = state.applied.last().expect("apply succeeded").suggestion;
    Ok(ApplyReport {
        output: out,
        placements: state.suggestions[applied].suggestion.expanded.len(),
        faces: mesh.num_faces(),
        volume_before: before,
        volume_after: signed_volume_unchecked(mesh),
    })
}

/// The command sequence a spec stands for, after the mesh import.
/// Suggestion ids assume a project with no earlier suggestions.
pub fn spec_ops(
    spec: &PatternSpec,
    element_name: String,
    svg: String,
    region: Option<RegionQuery>,
    export: MeshFormat,
) -> Vec<Op> {
    let mut ops = vec![Op::AddElement(ElementData {
        name: element_name,
        source: ElementInput::Svg { svg },
    })];
    ops.extend(region.map(Op::SelectRegion));
    ops.push(Op::Place(PlaceData {
        element: None,
        point: spec.anchor.into(),
        rotation: spec.rotation,
        scale: spec.scale,
    }));
    ops.push(Op::Suggest(match &spec.pattern {
        SpecPattern::Lattice { u_step, v_step, counts } => SuggestData {
            kind: PatternKind::Lattice,
            u_step: Some(*u_step),
            v_step: *v_step,
            counts: *counts,
            stroke: Vec::new(),
        },
        SpecPattern::Path { spacing, stroke } => SuggestData {
            kind: PatternKind::Path,
            u_step: Some(crate::surface_map::Vec2::new(*spacing, 0.0)),
            v_step: None,
            counts: None,
            stroke: stroke.iter().map(|&p| p.into()).collect(),
        },
    }));
    let first = SuggestionRef { suggestion: 0 };
    ops.extend([
        Op::Accept(first),
        Op::SetStyle(spec.style),
        Op::Apply(first),
        Op::Export(ExportData { format: export }),
    ]);
    ops
}
