//! End-to-end runs of the `flatcur` binary against the fixture files.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn flatcur(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flatcur"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn validate_octagon_reports_genus_two_and_6pi() {
    let surface = fixtures().join("octagon.json");
    let out = flatcur(&["validate", surface.to_str().unwrap(), "--format", "json"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["genus"], 2);
    let angle = v["cone_angles"][0].as_f64().unwrap();
    assert!((angle - 6.0 * std::f64::consts::PI).abs() < 1e-9);
    assert!(v["gauss_bonnet_residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn validate_rejects_bad_rotation_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"n": 4, "polygons": [{"id": 0, "vertices": [[0,0],[1,0],[1,1],[0,1]]}],
            "gluings": [{"from": [0,0], "to": [0,2], "rotation": 5},
                        {"from": [0,1], "to": [0,3], "rotation": 0}]}"#,
    )
    .unwrap();
    let out = flatcur(&["validate", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["error"].as_str().unwrap().contains("rotation index out of range"));
}

#[test]
fn decompose_l1_gives_single_half_atom() {
    let out = flatcur(&["decompose", "--norm", "l1", "-n", "4"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["n"], 4);
    let atoms = v["atoms"].as_array().unwrap();
    assert_eq!(atoms.len(), 1);
    assert!((atoms[0][0].as_f64().unwrap()).abs() < 1e-12);
    assert!((atoms[0][1].as_f64().unwrap() - 0.5).abs() < 1e-12);
}

#[test]
fn lengths_octagon_l1_residual_below_1e9() {
    let surface = fixtures().join("octagon.json");
    let curve = fixtures().join("octagon_vertical_loop.json");
    let out = flatcur(&[
        "lengths",
        surface.to_str().unwrap(),
        curve.to_str().unwrap(),
        "--norm",
        "l1",
        "--format",
        "json",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["pass"].as_bool().unwrap());
    assert!(v["norms"][0]["residual"].as_f64().unwrap() < 1e-9);
}

#[test]
fn tighten_writes_svg_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("out.svg");
    let surface = fixtures().join("octagon.json");
    let curve = fixtures().join("octagon_zigzag.json");
    let out = flatcur(&[
        "tighten",
        surface.to_str().unwrap(),
        curve.to_str().unwrap(),
        "--svg",
        svg_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let len = v["cat0_length"].as_f64().unwrap();
    assert!((len - (1.0 + std::f64::consts::SQRT_2)).abs() < 1e-8);
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    for layer in ["polygons", "geodesic", "conepoints"] {
        assert!(svg.contains(&format!("id=\"{layer}\"")));
    }
}

#[test]
fn trace_detects_octagon_cylinder() {
    let surface = fixtures().join("octagon.json");
    let out = flatcur(&[
        "trace",
        surface.to_str().unwrap(),
        "--theta",
        "0",
        "--cylinder",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    let cyl_line = text.lines().find(|l| l.contains("cylinder")).unwrap();
    let v: serde_json::Value = serde_json::from_str(cyl_line).unwrap();
    assert!((v["cylinder"]["width"].as_f64().unwrap() - 1.0).abs() < 1e-6);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let surface = fixtures().join("octagon.json");
    let curve = fixtures().join("octagon_vertical_loop.json");
    let args = [
        "lengths",
        surface.to_str().unwrap(),
        curve.to_str().unwrap(),
        "--norm",
        "l1",
        "--norm",
        "hexagonal",
        "--format",
        "json",
    ];
    let a = flatcur(&args);
    let b = flatcur(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn report_runs_the_fixture_suite() {
    let suite = fixtures().join("suite.json");
    let out = Command::new(env!("CARGO_BIN_EXE_flatcur"))
        .env("FLATCUR_FIXTURES", fixtures())
        .args(["report", suite.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "report failed:\n{}",
        String::from_utf8_lossy(&out.stdout)
    );
}
