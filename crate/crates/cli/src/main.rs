use clap::{Parser, Subcommand};
use knurl_core::config::EngineConfig;
use knurl_core::fixtures::study_surfaces;
use knurl_core::mesh::{check_watertight, load_mesh, save_mesh, MeshError, MeshFormat, TriangleMesh};
use knurl_core::region::{infer_region, write_face_list, CancelToken, SurfaceRegion};
use knurl_core::workbench::{run_apply, serve, ApplyOptions};
use knurl_core::{Error, Execution, Point};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Textures triangle meshes with repeated, printable relief.
///
/// Exit codes: 0 success, 1 check found an open mesh, 2 unreadable input,
/// 3 invalid spec or config, 4 processing failure.
#[derive(Parser)]
#[command(name = "knurl", version)]
struct Cli {
    /// Run single-threaded.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Apply the pattern described by a spec file.
    Apply {
        #[arg(long)]
        mesh: PathBuf,
        #[arg(long)]
        element: PathBuf,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also save the project (command log) here.
        #[arg(long)]
        project: Option<PathBuf>,
    },
    /// Print the watertightness report of a mesh.
    Check {
        #[arg(long)]
        mesh: PathBuf,
    },
    /// Infer the region under a cursor and write its face indices.
    Segment {
        #[arg(long)]
        mesh: PathBuf,
        /// Cursor position as x,y,z.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        cursor: Point,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Serve the line-JSON protocol on a local port.
    Serve {
        #[arg(long, default_value_t = 7878)]
        port: u16,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write the study surfaces (and their face regions) to a directory.
    Fixture {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

fn parse_point(s: &str) -> Result<Point, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| format!("{t:?} is not a number")))
        .collect::<Result<_, _>>()?;
    match v[..] {
        [x, y, z] => Ok(Point::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {} values", v.len())),
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Error> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), Error> {
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

fn read_mesh(path: &Path) -> Result<TriangleMesh, Error> {
    let bytes = read(path)?;
    let format = MeshFormat::detect(path, &bytes).ok_or_else(|| MeshError::Parse {
        offset: 0,
        message: format!("{}: unknown mesh extension, expected .stl or .obj", path.display()),
    })?;
    Ok(load_mesh(&bytes, format)?)
}

fn read_config(path: Option<&Path>) -> Result<EngineConfig, Error> {
    match path {
        Some(p) => Ok(EngineConfig::from_toml(&String::from_utf8_lossy(&read(p)?))?),
        None => Ok(EngineConfig::default()),
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    match cli.command {
        Cmd::Apply {
            mesh,
            element,
            spec,
            out,
            config,
            project,
        } => {
            let r = run_apply(
                &ApplyOptions {
                    mesh: Some(mesh),
                    element: Some(element),
                    spec,
                    out: Some(out),
                    config,
                    project,
                },
                exec,
            )?;
            println!(
                "wrote {} ({} placements, {} faces, volume {:.6} -> {:.6})",
                r.output.display(),
                r.placements,
                r.faces,
                r.volume_before,
                r.volume_after
            );
        }
        Cmd::Check { mesh } => {
            let m = read_mesh(&mesh)?;
            let report = check_watertight(&m);
            println!(
                "{}: {} vertices, {} faces, {}",
                mesh.display(),
                m.num_vertices(),
                m.num_faces(),
                report
            );
            println!("watertight: {}", report.is_watertight());
            if !report.is_watertight() {
                return Ok(ExitCode::from(1));
            }
        }
        Cmd::Segment {
            mesh,
            cursor,
            out,
            config,
        } => {
            let config = read_config(config.as_deref())?;
            let m = read_mesh(&mesh)?;
            let region = infer_region(&m, cursor, &config.region, &CancelToken::new(), exec)?;
            write(&out, write_face_list(&region))?;
            println!("{} of {} faces", region.faces().len(), m.num_faces());
        }
        Cmd::Serve { port, config } => {
            let config = read_config(config.as_deref())?;
            let addr = ("127.0.0.1", port);
            let listener = TcpListener::bind(addr).map_err(|e| Error::io(format!("127.0.0.1:{port}"), e))?;
            eprintln!("listening on {}", listener.local_addr().map_err(|e| Error::io("socket", e))?);
            serve(listener, config, exec).map_err(|e| Error::io("socket", e))?;
        }
        Cmd::Fixture { out_dir } => {
            std::fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
            for s in study_surfaces() {
                write(&out_dir.join(format!("{}.stl", s.name)), save_mesh(&s.mesh, MeshFormat::StlBinary)?)?;
                if let Some(faces) = &s.region {
                    let topo = s.mesh.topology();
                    let r = SurfaceRegion::from_faces(&s.mesh, &topo, faces.iter().copied());
                    write(&out_dir.join(format!("{}.faces", s.name)), write_face_list(&r))?;
                }
                println!("{} cursor {},{},{}", s.name, s.cursor.x, s.cursor.y, s.cursor.z);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
