use super::{Command, Project, ProjectError};
use crate::config::EngineConfig;
use crate::error::Error;
use crate::Execution;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// On-disk project: settings plus the command log. All other state is
/// rebuilt by replay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectFile {
    pub schema_version: u32,
    pub config: EngineConfig,
    pub log: Vec<Command>,
}

pub fn project_to_json(project: &Project) -> String {
    let file = ProjectFile {
        schema_version: SCHEMA_VERSION,
        config: project.config().clone(),
        log: project.log().to_vec(),
    };
    serde_json::to_string_pretty(&file).expect("project file serializes")
}

pub fn project_from_json(text: &str, exec: Execution) -> Result<Project, Error> {
    #[derive(Deserialize)]
    struct Version {
        schema_version: u32,
    }
    let v: Version = serde_json::from_str(text).map_err(|e| ProjectError::Corrupt(e.to_string()))?;
    if v.schema_version != SCHEMA_VERSION {
        return Err(ProjectError::UnsupportedVersion {
            found: v.schema_version,
            supported: SCHEMA_VERSION,
        }
        .into());
    }
    let file: ProjectFile = serde_json::from_str(text).map_err(|e| ProjectError::Corrupt(e.to_string()))?;
    let mut project = Project::new(file.config, exec);
    for cmd in file.log {
        let id = cmd.id;
        project
            .execute(cmd)
            .map_err(|e| ProjectError::Corrupt(format!("command {id} failed on replay: {e}")))?;
    }
    Ok(project)
}

pub fn save_project(project: &Project, path: &Path) -> Result<(), Error> {
    std::fs::write(path, project_to_json(project)).map_err(|e| Error::io(path, e))
}

pub fn load_project(path: &Path, exec: Execution) -> Result<Project, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    project_from_json(&text, exec)
}
