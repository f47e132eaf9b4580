use super::command::{Command, Event, Op};
use super::{load_project, save_project, Project, ProjectError};
use crate::config::{EngineConfig, RegionConfig};
use crate::error::Error;
use crate::mesh::{MeshError, MeshFormat, TriangleMesh};
use crate::region::{infer_region, CancelToken};
use crate::{Execution, Point};
use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::Deserialize;
use serde_json::{json, Value};
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::thread::JoinHandle;

#[derive(Debug, Deserialize)]
struct Request {
    id: u64,
    kind: String,
    #[serde(default)]
    payload: Value,
}

fn message(source: Option<u64>, kind: &str, payload: Value) -> String {
    json!({ "source_id": source, "kind": kind, "payload": payload }).to_string()
}

fn rejected(source: Option<u64>, code: &str, msg: String) -> String {
    message(source, "REJECTED", json!({ "code": code, "message": msg }))
}

struct PreviewJob {
    source: u64,
    mesh: Arc<TriangleMesh>,
    cursor: Point,
    config: RegionConfig,
    exec: Execution,
    cancel: CancelToken,
}

/// Runs region inference off the command loop. Submitting a new cursor
/// cancels the query in flight; only the newest one reports faces.
pub struct PreviewWorker {
    jobs: Option<Sender<PreviewJob>>,
    current: Option<CancelToken>,
    handle: Option<JoinHandle<()>>,
}

impl PreviewWorker {
    pub fn new(out: Sender<String>) -> Self {
        let (tx, rx) = channel::<PreviewJob>();
        let handle = std::thread::spawn(move || preview_loop(rx, out));
        PreviewWorker {
            jobs: Some(tx),
            current: None,
            handle: Some(handle),
        }
    }

    fn submit(&mut self, source: u64, mesh: Arc<TriangleMesh>, cursor: Point, config: RegionConfig, exec: Execution) {
        if let Some(c) = self.current.take() {
            c.cancel();
        }
        let cancel = CancelToken::new();
        self.current = Some(cancel.clone());
        if let Some(tx) = &self.jobs {
            // A send error means the worker is gone; nothing left to report to.
            let _ = tx.send(PreviewJob {
                source,
                mesh,
                cursor,
                config,
                exec,
                cancel,
            });
        }
    }
}

impl Drop for PreviewWorker {
    fn drop(&mut self) {
        if let Some(c) = &self.current {
            c.cancel();
        }
        self.jobs = None;
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn preview_loop(rx: Receiver<PreviewJob>, out: Sender<String>) {
    while let Ok(mut job) = rx.recv() {
        // Skip straight to the newest cursor.
        while let Ok(newer) = rx.try_recv() {
            let _ = out.send(message(Some(job.source), "REGION_PREVIEW_CANCELLED", Value::Null));
            job = newer;
        }
        let msg = match infer_region(&job.mesh, job.cursor, &job.config, &job.cancel, job.exec) {
            _ if job.cancel.is_cancelled() => message(Some(job.source), "REGION_PREVIEW_CANCELLED", Value::Null),
            Ok(r) => message(Some(job.source), "REGION_PREVIEW", json!({ "faces": r.faces() })),
            Err(e) => {
                let e = Error::from(e);
                rejected(Some(job.source), e.code(), e.to_string())
            }
        };
        if out.send(msg).is_err() {
            return;
        }
    }
}

/// One client connection: a single-writer command loop over a project.
///
/// Besides the project commands, requests may be `SAVE {path}`, `LOAD
/// {path}`, `STATE` and `PREVIEW_REGION {cursor}`. `IMPORT_MESH` and
/// `ADD_ELEMENT` also accept a `path` in place of inline data; the file is
/// read before the command is logged, so the log stays self-contained.
pub struct Session {
    project: Project,
    preview: PreviewWorker,
}

impl Session {
    /// Asynchronous preview results go to `out`.
    pub fn new(config: EngineConfig, exec: Execution, out: Sender<String>) -> Self {
        Session {
            project: Project::new(config, exec),
            preview: PreviewWorker::new(out),
        }
    }

    pub fn project(&self) -> &Project {
        &self.project
    }

    /// Handles one request line and returns the reply lines: the events it
    /// caused, then a final `ACK` or `REJECTED`.
    pub fn handle_line(&mut self, line: &str) -> Vec<String> {
        let req: Request = match serde_json::from_str(line) {
            Ok(r) => r,
            Err(e) => return vec![rejected(None, "MALFORMED", e.to_string())],
        };
        match self.dispatch(&req) {
            Ok(events) => {
                let mut out: Vec<String> = events
                    .into_iter()
                    .map(|e| message(Some(req.id), &kind_name(&e), e.payload))
                    .collect();
                out.push(message(Some(req.id), "ACK", json!({ "kind": req.kind })));
                out
            }
            Err(e) => vec![rejected(Some(req.id), e.code(), e.to_string())],
        }
    }

    fn dispatch(&mut self, req: &Request) -> Result<Vec<Event>, Error> {
        let path = || -> Result<PathBuf, Error> {
            req.payload
                .get("path")
                .and_then(Value::as_str)
                .map(PathBuf::from)
                .ok_or_else(|| ProjectError::InvalidPayload("missing \"path\"".into()).into())
        };
        match req.kind.as_str() {
            "SAVE" => {
                save_project(&self.project, &path()?)?;
                Ok(Vec::new())
            }
            "LOAD" => {
                self.project = load_project(&path()?, self.project.execution())?;
                Ok(vec![Event::new(
                    super::EventKind::StateRestored,
                    self.project.state().summary(),
                )])
            }
            "STATE" => Ok(vec![Event::new(
                super::EventKind::StateRestored,
                self.project.state().summary(),
            )]),
            "PREVIEW_REGION" => {
                let cursor: [f64; 3] = serde_json::from_value(req.payload.get("cursor").cloned().unwrap_or_default())
                    .map_err(|e| ProjectError::InvalidPayload(format!("cursor: {e}")))?;
                let mesh = self.project.state().mesh()?.clone();
                let config = self.project.config().region.clone();
                self.preview
                    .submit(req.id, mesh, Point::from(cursor), config, self.project.execution());
                Ok(Vec::new())
            }
            _ => {
                let payload = resolve_paths(&req.kind, req.payload.clone())?;
                let op: Op = serde_json::from_value(json!({ "kind": req.kind, "payload": payload }))
                    .map_err(|e| ProjectError::InvalidPayload(e.to_string()))?;
                self.project.execute(Command { id: req.id, op })
            }
        }
    }
}

fn kind_name(e: &Event) -> String {
    serde_json::to_value(e.kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

fn resolve_paths(kind: &str, mut payload: Value) -> Result<Value, Error> {
    let Some(path) = payload.get("path").and_then(Value::as_str).map(PathBuf::from) else {
        return Ok(payload);
    };
    let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
    let obj = payload.as_object_mut().expect("has a path key");
    obj.remove("path");
    match kind {
        "IMPORT_MESH" => {
            let format = MeshFormat::detect(&path, &bytes).ok_or_else(|| MeshError::Parse {
                offset: 0,
                message: format!("{}: unknown mesh extension", path.display()),
            })?;
            obj.insert("format".into(), json!(format));
            obj.insert("data".into(), json!(B64.encode(&bytes)));
        }
        "ADD_ELEMENT" => {
            obj.insert("svg".into(), json!(String::from_utf8_lossy(&bytes)));
        }
        _ => return Err(ProjectError::InvalidPayload(format!("{kind} takes no path")).into()),
    }
    Ok(payload)
}

fn connection(stream: TcpStream, config: EngineConfig, exec: Execution) -> std::io::Result<()> {
    let (tx, rx) = channel::<String>();
    let mut writer = stream.try_clone()?;
    let writer = std::thread::spawn(move || {
        for line in rx {
            if writeln!(writer, "{line}").and_then(|_| writer.flush()).is_err() {
                break;
            }
        }
    });
    let mut session = Session::new(config, exec, tx.clone());
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        for reply in session.handle_line(&line) {
            if tx.send(reply).is_err() {
                break;
            }
        }
    }
    drop(session);
    drop(tx);
    let _ = writer.join();
    Ok(())
}

/// Accepts connections forever, one session per connection.
pub fn serve(listener: TcpListener, config: EngineConfig, exec: Execution) -> std::io::Result<()> {
    for stream in listener.incoming() {
        let stream = stream?;
        let config = config.clone();
        std::thread::spawn(move || connection(stream, config, exec));
    }
    Ok(())
}

