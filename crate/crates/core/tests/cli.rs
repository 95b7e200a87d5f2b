use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const DIAG: &str = r#"
[system]
dimension = 2
interval = [0.0, 0.4]

[[pole]]
position = "0"
residue = [["t", "0"], ["0", "-t"]]

[run]
samples = 5
"#;

const SCHLESINGER: &str = r#"
[system]
dimension = 2

[[pole]]
position = "-1"
residue = [["0.1", "0.2"], ["0.05", "-0.1"]]

[[pole]]
position = "0.5*i"
residue = [["-0.15", "0.1*i"], ["0.3", "0.12"]]

[[pole]]
position = "1"
residue = [["0.05", "-0.3 - 0.1*i"], ["-0.35 - 0.2*i", "-0.02"]]

[schlesinger]
velocities = ["0", "0.3 - 0.2*i", "0.1*i"]

[run]
samples = 5
"#;

fn monolab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_monolab")).args(args).output().unwrap()
}

fn write_spec(dir: &Path, text: &str) -> String {
    let p = dir.join("spec.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn dhv_demo_succeeds_without_spec() {
    let out = monolab(&["--command", "dhv-demo"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["status"], "ok");
    assert_eq!(r["metadata"]["command"], "dhv-demo");
    assert!(r["metadata"]["conventions"].is_object());
}

#[test]
fn refuted_family_exits_one_with_witness_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), DIAG);
    let csv = dir.path().join("profile.csv");
    let out = monolab(&["--spec", &spec, "--command", "check-iso", "--csv", csv.to_str().unwrap(), "--seed", "42"]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(r["status"], "refuted");
    assert_eq!(r["results"]["verdict"]["witness"]["quantity"], "trace(M_1)");
    assert_eq!(r["metadata"]["seed"], 42);
    let text = fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("t,det(M_1).re,det(M_1).im,trace(M_1).re"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn projective_check_of_diag_family_is_also_refuted() {
    // trace(M)²/det(M) = 4cos²(2πt) still moves
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), DIAG);
    let out = monolab(&["--spec", &spec, "--command", "check-projiso"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn schlesinger_flow_is_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), SCHLESINGER);
    let out = monolab(&["--spec", &spec, "--command", "schlesinger"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let r = report(&out);
    assert_eq!(r["metadata"]["mode"], "schlesinger");
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), "[system]\ndimension = 2\n[[pole]]\nposition = \"1 +\"\nresidue = [[\"0\",\"0\"],[\"0\",\"0\"]]\n");
    let out = monolab(&["--spec", &spec, "--command", "monodromy"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("pole 1"), "{err}");
    assert!(out.stdout.is_empty());

    assert_eq!(monolab(&["--spec", "/nonexistent/spec.toml", "--command", "monodromy"]).status.code(), Some(2));
    assert_eq!(monolab(&["--command", "monodromy"]).status.code(), Some(2));
    assert_eq!(monolab(&["--command", "no-such-command"]).status.code(), Some(2));
}

#[test]
fn reports_repeat_modulo_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), DIAG);
    let strip = |o: Output| {
        let mut v = report(&o);
        v["metadata"]["timestamp"] = Value::Null;
        v
    };
    let a = strip(monolab(&["--spec", &spec, "--command", "monodromy"]));
    let b = strip(monolab(&["--spec", &spec, "--command", "monodromy"]));
    assert_eq!(a, b);
    assert_eq!(a["metadata"]["spec_sha256"].as_str().map(str::len), Some(64));
}
