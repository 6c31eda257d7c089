use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const M3: &str = r#"{"labels":["0","a","b"],"base":"0","dist":[[0,1,1],[1,0,1],[1,1,0]]}"#;
const PATH3: &str = r#"{"labels":["0","1","2"],"base":"0","dist":[[0,1,2],[1,0,1],[2,1,0]]}"#;
const C4: &str = "p0,p1,p2,p3\n0,1,2,1\n1,0,1,2\n2,1,0,1\n1,2,1,0\n";

fn lipfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipfree")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn verdict_summary_and_json() {
    let dir = TempDir::new().unwrap();
    let m3 = file(&dir, "m3.json", M3);
    let out = lipfree(&["verdict", s(&m3)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verdict: NotIsometric"));

    let out = lipfree(&["verdict", s(&m3), "--json"]);
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["command"], "verdict");
    assert_eq!(report["result"]["primal"]["distance"]["value"], "1");
    assert_eq!(report["result"]["dual"]["distance"]["value"], "1");

    let path3 = file(&dir, "path.json", PATH3);
    let out = lipfree(&["verdict", s(&path3)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("IsometricToL1"));
}

#[test]
fn stored_reports_verify_and_tampering_fails() {
    let dir = TempDir::new().unwrap();
    let m3 = file(&dir, "m3.json", M3);
    let report = dir.path().join("verdict.json");
    assert_eq!(lipfree(&["verdict", s(&m3), "--out", s(&report)]).status.code(), Some(0));
    assert_eq!(lipfree(&["verify", s(&report)]).status.code(), Some(0));
    assert_eq!(lipfree(&["verdict", "--check", s(&report)]).status.code(), Some(0));

    for command in ["check", "realize", "bm"] {
        let path = dir.path().join(format!("{command}.json"));
        assert_eq!(lipfree(&[command, s(&m3), "--out", s(&path)]).status.code(), Some(0));
        let out = lipfree(&["verify", s(&path)]);
        assert_eq!(out.status.code(), Some(0), "{command}: {}", stdout(&out));
    }
    // a bm report is not a verdict certificate
    let bm = dir.path().join("bm.json");
    assert_eq!(lipfree(&["verdict", "--check", s(&bm)]).status.code(), Some(2));

    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    doc["result"]["primal"]["distance"]["value"] = "1/2".into();
    let tampered = file(&dir, "tampered.json", &doc.to_string());
    let out = lipfree(&["verify", s(&tampered)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("FAILED"));
}

#[test]
fn invalid_inputs_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let asym = file(&dir, "asym.json", r#"{"labels":["a","b"],"base":"a","dist":[[0,1],[2,0]]}"#);
    assert_eq!(lipfree(&["check", s(&asym)]).status.code(), Some(2));

    let broken = file(&dir, "broken.json", "{\n \"labels\": [\n");
    let out = lipfree(&["check", s(&broken)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    assert_eq!(lipfree(&["check", "/nonexistent/space.json"]).status.code(), Some(2));

    let c4 = file(&dir, "c4.csv", C4);
    assert_eq!(lipfree(&["realize", s(&c4)]).status.code(), Some(2));
    let path3 = file(&dir, "path.json", PATH3);
    let out = lipfree(&["bm", s(&path3)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sep"));
}

#[test]
fn cycle_is_not_a_tree_metric() {
    let dir = TempDir::new().unwrap();
    let c4 = file(&dir, "c4.csv", C4);
    let out = lipfree(&["verdict", s(&c4)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("NotZeroHyperbolic"));
    let out = lipfree(&["check", s(&c4)]);
    assert!(stdout(&out).contains("four-point condition: fail"));
}

#[test]
fn tree_input_and_format_flag() {
    let dir = TempDir::new().unwrap();
    let tree = file(
        &dir,
        "tree.json",
        r#"{"nodes":[{"id":0,"kind":"original","label":"x"},{"id":1,"kind":"steiner"},
            {"id":2,"kind":"original","label":"y"},{"id":3,"kind":"original","label":"z"}],
            "edges":[{"u":0,"v":1,"len":"1"},{"u":1,"v":2,"len":"1"},{"u":1,"v":3,"len":"1"}]}"#,
    );
    let out = lipfree(&["bm", s(&tree), "--format", "tree"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("formula_bound: 8/7"));
    assert_eq!(lipfree(&["check", s(&tree), "--format", "matrix"]).status.code(), Some(2));
}

#[test]
fn norms_of_vectors_and_functions() {
    let dir = TempDir::new().unwrap();
    let m3 = file(&dir, "m3.json", M3);
    let vector = file(&dir, "v.json", r#"{"coeffs":{"a":"1","b":"1"}}"#);
    let out = lipfree(&["norm", s(&m3), s(&vector), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["result"]["norm"]["value"], "2");
    assert!(report["result"]["plan"].is_array());

    let function = file(&dir, "f.json", r#"{"values":{"a":"1/2","b":"-1/2"}}"#);
    let out = lipfree(&["norm", s(&m3), s(&function)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("function norm: 1"));
}

#[test]
fn generator_is_deterministic() {
    let a = lipfree(&["gen", "random-ultrametric", "5", "--seed", "1"]);
    let b = lipfree(&["gen", "random-ultrametric", "5", "--seed", "1"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let doc: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(doc["labels"].as_array().unwrap().len(), 5);

    let dir = TempDir::new().unwrap();
    let out = dir.path().join("cycle.json");
    assert_eq!(lipfree(&["gen", "perturbed-non-hyperbolic", "6", "--out", s(&out)]).status.code(), Some(0));
    assert!(stdout(&lipfree(&["verdict", s(&out)])).contains("NotZeroHyperbolic"));
    assert_ne!(lipfree(&["gen", "no-such-kind", "5"]).status.code(), Some(0));
}
