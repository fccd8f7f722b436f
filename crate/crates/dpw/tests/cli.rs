//! Tests of the `dpw` binary: flags, exit codes and exported files.

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use common::class_config;
use dpw::cli::write_obj;
use dpw::loopalg::LaurentMatrix;
use dpw::realform::ClassKind;
use serde_json::Value;

fn write_config(dir: &Path, class: ClassKind, n: usize, edit: impl FnOnce(&mut Value)) -> std::path::PathBuf {
    let mut v = serde_json::to_value(class_config(class, n)).unwrap();
    edit(&mut v);
    let path = dir.join(format!("{class}.json"));
    fs::write(&path, v.to_string()).unwrap();
    path
}

fn dpw(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dpw")).args(args).output().unwrap()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn obj_counts(path: &Path) -> (usize, usize) {
    let text = fs::read_to_string(path).unwrap();
    let v = text.lines().filter(|l| l.starts_with("v ")).count();
    let f = text.lines().filter(|l| l.starts_with("f ")).count();
    (v, f)
}

#[test]
fn two_by_two_grid_gives_two_triangles() {
    let pts = vec![
        Some([0.0, 0.0, 0.0]),
        Some([1.0, 0.0, 0.0]),
        Some([0.0, 1.0, 0.0]),
        Some([1.0, 1.0, 1.0]),
    ];
    let mut buf = Vec::new();
    write_obj(&mut buf, &pts, 2, 2).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 6);
    assert!(lines[..4].iter().all(|l| l.starts_with("v ")));
    assert_eq!(&lines[4..], ["f 1 2 4", "f 1 4 3"]);
}

#[test]
fn successful_run_writes_report_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ClassKind::C3, 41, |_| {});
    let out = dir.path().join("out");
    let res = dpw(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let report = read_json(&out.join("report.json"));
    for key in [
        "class",
        "K_mean",
        "K_std",
        "H_mean",
        "H_std",
        "gc_residual",
        "harmonicity_residual",
        "degenerate_points",
        "bigcell_failures",
    ] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert_eq!(report["class"], "c3");
    assert_eq!(obj_counts(&out.join("surface.obj")), (41 * 41, 2 * 40 * 40));
    assert_eq!(obj_counts(&out.join("parallel.obj")), (41 * 41, 2 * 40 * 40));
    let points = read_json(&out.join("surface_points.json"));
    assert_eq!(points["points"].as_array().unwrap().len(), 41 * 41);
    assert!(!out.join("splits.json").exists());
}

#[test]
fn flags_override_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ClassKind::C4, 41, |_| {});
    let out = dir.path().join("out");
    let res = dpw(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--grid",
        "9",
        "--q",
        "0.8",
        "--lambda-t",
        "-0.2",
        "--kcap",
        "14",
        "--out",
        out.to_str().unwrap(),
        "--dump-splits",
    ]);
    // A 9×9 grid is too coarse for the curvature tolerances; the run still completes.
    assert!(
        matches!(res.status.code(), Some(0 | 1)),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    assert_eq!(obj_counts(&out.join("surface.obj")), (81, 128));
    let herm = read_json(&out.join("surface_herm.json"));
    assert_eq!(herm["matrices"].as_array().unwrap().len(), 81);
    assert_eq!(herm["points"][0].as_array().unwrap().len(), 4, "raw Herm(2) 4-vectors");
    let splits = read_json(&out.join("splits.json"));
    let first = &splits.as_array().unwrap()[0];
    for key in ["F", "Vplus", "Vminus"] {
        let m: LaurentMatrix = serde_json::from_value(first[key].clone()).unwrap();
        assert!(m.is_twisted());
        assert!(m.kmax() <= 14 && m.kmin() >= -14);
    }
    let report = read_json(&out.join("report.json"));
    let h = report["H_mean"].as_f64().unwrap();
    assert!((h - (-0.8f64).tanh()).abs() < 1e-2);
}

#[test]
fn class_flag_overrides_class() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ClassKind::C3, 9, |_| {});
    let out = dir.path().join("out");
    // C1 needs imaginary H, so overriding the class of a C3 config is rejected.
    let res = dpw(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--class",
        "c1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("imaginary"));
    assert!(!out.join("report.json").exists());
}

#[test]
fn failing_invariant_exits_with_one_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ClassKind::S2, 21, |v| {
        v["tolerances"]["harmonicity"] = Value::from(0.0);
    });
    let out = dir.path().join("out");
    let res = dpw(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let report = read_json(&out.join("report.json"));
    let failed: Vec<&Value> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .collect();
    assert_eq!(failed.len(), 1);
    assert_eq!(failed[0]["name"], "harmonicity");
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ClassKind::C3, 9, |v| {
        v["H"] = serde_json::json!([0.0, 1.0]);
    });
    let res = dpw(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let missing = dpw(&["run", "--config", "/nonexistent/config.json"]);
    assert_eq!(missing.status.code(), Some(2));
    let cfg = write_config(dir.path(), ClassKind::S1, 9, |v| {
        v.as_object_mut().unwrap().remove("tau");
    });
    let res = dpw(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("tau"));
}

#[test]
fn vanishing_potential_entry_is_reported_with_its_node() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ClassKind::C3, 9, |v| {
        v["eta"][0]["expr"][0][1] = Value::from("z");
    });
    let res = dpw(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("validate") && err.contains("(4, 4)"), "{err}");
}

#[test]
fn identical_runs_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), ClassKind::C2, 21, |_| {});
    let mut reports = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let res = dpw(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(res.status.code().is_some());
        reports.push(fs::read(out.join("report.json")).unwrap());
        reports.push(fs::read(out.join("surface.obj")).unwrap());
    }
    assert_eq!(reports[0], reports[2]);
    assert_eq!(reports[1], reports[3]);
}
