use std::path::Path;
use std::process::{Command, Output};

fn knurl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_knurl")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn fixtures() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    assert!(knurl(&["fixture", "--out-dir", s(dir.path())]).status.success());
    std::fs::write(
        dir.path().join("dot.svg"),
        r#"<svg xmlns="http://www.w3.org/2000/svg"><circle r="1.5"/></svg>"#,
    )
    .unwrap();
    dir
}

fn apply(dir: &Path, spec: &str, extra: &[&str]) -> Output {
    let spec_path = dir.join("job.spec");
    std::fs::write(&spec_path, spec).unwrap();
    let (mesh, element, out) = (dir.join("plate.stl"), dir.join("dot.svg"), dir.join("out.stl"));
    let mut args = vec![
        "apply",
        "--mesh",
        s(&mesh),
        "--element",
        s(&element),
        "--spec",
        s(&spec_path),
        "--out",
        s(&out),
    ];
    args.extend(extra);
    knurl(&args)
}

const GRID: &str = "region-cursor: 8, 8, 3\npattern: grid 3x3 step 5\nstyle: raised 1\n";

#[test]
fn apply_succeeds_and_check_accepts_the_result() {
    let dir = fixtures();
    let out = apply(dir.path(), GRID, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("9 placements"));
    let check = knurl(&["check", "--mesh", s(&dir.path().join("out.stl"))]);
    assert_eq!(check.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&check.stdout).contains("watertight: true"));
}

#[test]
fn missing_input_exits_2() {
    let dir = fixtures();
    std::fs::remove_file(dir.path().join("dot.svg")).unwrap();
    let out = apply(dir.path(), GRID, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error[IO]"));
}

#[test]
fn zero_step_exits_3_with_the_line() {
    let dir = fixtures();
    let out = apply(dir.path(), "region-cursor: 8, 8, 3\npattern: grid 3x3 step 0\nstyle: raised 1\n", &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("SPEC_INVALID") && err.contains("line 2"), "{err}");
    assert!(!dir.path().join("out.stl").exists());
}

#[test]
fn bad_config_exits_3() {
    let dir = fixtures();
    let cfg = dir.path().join("engine.toml");
    std::fs::write(&cfg, "[texture]\nmin_wal = 1\n").unwrap();
    let out = apply(dir.path(), GRID, &["--config", s(&cfg)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CONFIG_INVALID"));
}

#[test]
fn processing_failure_exits_4() {
    let dir = fixtures();
    let out = apply(dir.path(), "region-cursor: 8, 8, 3\npattern: grid 3x3 step 5\nstyle: recessed 4\n", &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("TEXTURE_RECESS_TOO_DEEP"));
}

#[test]
fn check_reports_open_meshes() {
    let dir = tempfile::tempdir().unwrap();
    let open = dir.path().join("open.obj");
    std::fs::write(&open, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
    let out = knurl(&["check", "--mesh", s(&open)]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("boundary_edges=3") && text.contains("watertight: false"), "{text}");
    let garbage = dir.path().join("x.stl");
    std::fs::write(&garbage, "solid x\nfacet oops\n").unwrap();
    assert_eq!(knurl(&["check", "--mesh", s(&garbage)]).status.code(), Some(2));
}

#[test]
fn segment_writes_a_face_list() {
    let dir = fixtures();
    let faces = dir.path().join("side.txt");
    let out = knurl(&[
        "segment",
        "--mesh",
        s(&dir.path().join("sphere.stl")),
        "--cursor",
        "0,0,-15",
        "--out",
        s(&faces),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let n = std::fs::read_to_string(&faces).unwrap().lines().count();
    assert_eq!(n, 5120);
    let miss = knurl(&[
        "segment",
        "--mesh",
        s(&dir.path().join("sphere.stl")),
        "--cursor",
        "0,0,90",
        "--out",
        s(&faces),
    ]);
    assert_eq!(miss.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&miss.stderr).contains("REGION_NO_HIT"));
}

#[test]
fn region_file_and_project_output() {
    let dir = fixtures();
    let project = dir.path().join("job.json");
    let spec = "region-file: cylinder.faces\nanchor: 15, 0, 8\npattern: row 3 step 6\nstyle: recessed 0.6\n";
    std::fs::write(dir.path().join("job.spec"), spec).unwrap();
    let out = knurl(&[
        "apply",
        "--mesh",
        s(&dir.path().join("cylinder.stl")),
        "--element",
        s(&dir.path().join("dot.svg")),
        "--spec",
        s(&dir.path().join("job.spec")),
        "--out",
        s(&dir.path().join("out.obj")),
        "--project",
        s(&project),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("3 placements"));
    let text = std::fs::read_to_string(&project).unwrap();
    assert!(text.contains("\"schema_version\": 1") && text.contains("\"IMPORT_MESH\""));
    assert_eq!(knurl(&["check", "--mesh", s(&dir.path().join("out.obj"))]).status.code(), Some(0));
}
