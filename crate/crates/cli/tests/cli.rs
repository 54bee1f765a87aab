use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn csflab(args: &[&str], stdin: Option<&[u8]>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_csflab"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary runs");
    let mut pipe = child.stdin.take().expect("stdin piped");
    pipe.write_all(stdin.unwrap_or_default()).expect("write stdin");
    drop(pipe);
    child.wait_with_output().expect("process finishes")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

#[test]
fn distance_of_curve_with_itself_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let out = csflab(&["gen", "--n", "64", "--amplitude", "0.2", "-o", path.to_str().unwrap()], None);
    assert!(out.status.success());
    for metric in ["frechet", "hausdorff"] {
        let p = path.to_str().unwrap();
        let out = csflab(&["distance", "--metric", metric, p, p], None);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(stdout(&out).trim(), "0");
    }
}

#[test]
fn shrinking_latitude_through_pipes() {
    let curve = csflab(&["gen", "--latitude", "1.0471975512", "--n", "512"], None);
    assert!(curve.status.success());
    let traj = csflab(&["evolve", "--t-end", "0.3"], Some(&curve.stdout));
    assert!(traj.status.success());
    let text = stdout(&traj);
    let status: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(status["status"], "ReachedEnd");
    let report = csflab(&["analyze"], Some(&traj.stdout));
    assert!(report.status.success());
    let v: Value = serde_json::from_str(&stdout(&report)).unwrap();
    let cos = v["small_circle"]["cos_colatitude"].as_f64().unwrap();
    let expected = 0.5 * 0.3f64.exp();
    assert!((cos - expected).abs() <= 1e-3, "cos θ = {cos}, expected {expected}");
}

#[test]
fn gage_experiment_passes() {
    let out = csflab(&["experiment", "gage", "--amplitude", "0.3", "--t-end", "3"], None);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["name"], "gage");
    assert_eq!(v["pass"], true);
}

#[test]
fn reports_are_byte_identical() {
    let args = ["experiment", "sandwich", "--n", "64", "--seed", "4", "--t-end", "0.05", "--record-every", "10"];
    let a = csflab(&args, None);
    let b = csflab(&args, None);
    assert!(a.status.success());
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn report_and_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("chord.json");
    let out = csflab(&["experiment", "chord", "--x-index", "17", "-o", json.to_str().unwrap()], None);
    assert!(out.status.success());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    let csv = std::fs::read_to_string(dir.path().join("chord.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().split(',').any(|h| h == "area_left"));
    assert_eq!(lines.count(), report["rows"].as_array().unwrap().len());
}

#[test]
fn failed_experiment_exits_one() {
    let out = csflab(&["experiment", "gage", "--n", "64", "--t-end", "0.05", "--tol-gage-final", "1e-12"], None);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["pass"], false);
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_input_exits_two() {
    let out = csflab(&["evolve"], Some(b"{\"points\": [[1, 0]]}"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed input"));

    let out = csflab(&["evolve"], Some(b"not json"));
    assert_eq!(out.status.code(), Some(2));

    let out = csflab(&["distance", "--metric", "taxicab", "a", "b"], None);
    assert_eq!(out.status.code(), Some(2));

    let out = csflab(&["experiment", "gage", "--cfl", "0.9"], None);
    assert_eq!(out.status.code(), Some(2));
}
