use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use stmesh_core::io::native::{self, MeshFile};
use stmesh_core::{extrude_subdivide, fixtures, CellId, TaggedPentatope, TimeSlices};

fn stmesh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stmesh")).args(args).output().expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn pipeline_on_kuhn_cube() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let out = dir.path().join("out");
    let output = stmesh(&[
        "pipeline",
        "--fixture",
        "kuhn-cube",
        "--slices",
        "0,1",
        "--refine-rounds",
        "2",
        "--uniform",
        "--out-dir",
        out.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(0), "{}", stdout(&output));
    let value = read_json(&report);
    assert_eq!(value["passed"], true);
    assert_eq!(value["extrusion"]["cells"], 24);
    assert_eq!(value["rounds"][1]["cells"], 96);
    assert!(out.join("round-02.stmesh").exists());

    // The written mesh passes the standalone checks.
    let last = out.join("round-02.stmesh");
    let verify = stmesh(&["verify", "--input", last.to_str().unwrap()]);
    assert_eq!(verify.status.code(), Some(0), "{}", stdout(&verify));
    let stats = stmesh(&["stats", "--input", last.to_str().unwrap()]);
    assert!(stdout(&stats).contains("96"));
}

#[test]
fn corrupted_tag_is_reported() {
    let mesh = fixtures::kuhn_cube();
    let colors = fixtures::kuhn_grid_coloring(1);
    let mut pents = extrude_subdivide(&mesh, &colors, &TimeSlices::new(vec![0.0, 1.0, 2.0]).unwrap()).unwrap();
    let [a, b, c, d, e] = *pents.cells()[5].vertices();
    pents.set_tag(CellId(5), TaggedPentatope::new([c, e, a, d, b], 2).unwrap()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.stmesh");
    native::write(&input, &MeshFile::Pent(pents)).unwrap();
    let report = dir.path().join("report.json");
    let output = stmesh(&["tag-check", "--input", input.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let value = read_json(&report);
    let violations = value["result"]["violations"].as_array().unwrap();
    assert!(!violations.is_empty());
    for v in violations {
        let cells = v["cells"].as_array().unwrap();
        assert!(cells.iter().any(|c| c == 5), "{v}");
    }
    assert!(stdout(&output).contains("are not consistently tagged"));
}

#[test]
fn odd_fan_needs_barycentric() {
    let output = stmesh(&["color", "--fixture", "odd-fan"]);
    assert_eq!(output.status.code(), Some(1));
    let text = format!("{}{}", stdout(&output), String::from_utf8_lossy(&output.stderr));
    assert!(text.contains("--auto-barycentric"), "{text}");

    let output = stmesh(&["pipeline", "--fixture", "odd-fan", "--slices", "0,1", "--auto-barycentric"]);
    assert_eq!(output.status.code(), Some(0), "{}", stdout(&output));
}

#[test]
fn reports_are_reproducible() {
    let run = |dir: &Path| {
        let report = dir.join("report.json");
        let output = stmesh(&[
            "pipeline",
            "--fixture",
            "kuhn-grid(2)",
            "--t0",
            "0",
            "--t1",
            "1",
            "--num-slabs",
            "2",
            "--refine-rounds",
            "3",
            "--mark-frac",
            "0.25",
            "--seed",
            "7",
            "--out-dir",
            dir.join("out").to_str().unwrap(),
            "--report",
            report.to_str().unwrap(),
        ]);
        assert_eq!(output.status.code(), Some(0), "{}", stdout(&output));
        (std::fs::read(report).unwrap(), std::fs::read(dir.join("out/round-03.stmesh")).unwrap())
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(a.path()), run(b.path()));
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["pipeline", "--fixture", "no-such-mesh", "--slices", "0,1"][..],
        &["pipeline", "--fixture", "kuhn-cube"],
        &["pipeline", "--fixture", "kuhn-cube", "--slices", "1,0"],
        &["extrude", "--input", "/nonexistent/mesh.stmesh", "--slices", "0,1"],
        &["bisect", "--input", "/nonexistent/mesh.stmesh", "--mark-frac", "0.5"],
        &["frobnicate"],
    ] {
        let output = stmesh(args);
        assert_eq!(output.status.code(), Some(2), "{args:?}: {}", stdout(&output));
    }
}
