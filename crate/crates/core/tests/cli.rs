mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::programs_dir;

fn qpl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpl")).args(args).output().unwrap()
}

fn program(name: &str) -> String {
    programs_dir().join(name).to_str().unwrap().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn check_prints_signatures() {
    let o = qpl(&["check", &program("ghz.qpl")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("GHZ : Nat -> ListQ"), "{}", stdout(&o));
}

#[test]
fn static_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let copy_qubit = write(dir.path(), "copy.qpl", "new qbit q;\nr = copy q");
    let o = qpl(&["check", &copy_qubit]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    let empty = write(dir.path(), "empty.qpl", "");
    assert_eq!(qpl(&["run", &empty]).status.code(), Some(1));
    let garbage = write(dir.path(), "bad.qpl", "new qbit ;;");
    assert_eq!(qpl(&["check", &garbage]).status.code(), Some(1));
    assert_eq!(qpl(&["check", "/nonexistent/file.qpl"]).status.code(), Some(1));
}

#[test]
fn runs_are_reproducible() {
    let path = program("cointoss.qpl");
    let a = qpl(&["run", &path, "--seed", "11", "--format", "json"]);
    let b = qpl(&["run", &path, "--seed", "11", "--format", "json"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let j: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert!(j.is_object());
}

#[test]
fn enumerate_reports_divergence() {
    let o = qpl(&["enumerate", &program("ttloop.qpl"), "--max-steps", "100", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["halt_lower_bound"].as_f64(), Some(0.0));
    assert_eq!(j["frontier_mass"].as_f64(), Some(1.0));
}

#[test]
fn enumerate_writes_a_tree() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("tree.dot");
    let o = qpl(&["enumerate", &program("teleport.qpl"), "--tree", dot.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(std::fs::read_to_string(&dot).unwrap().starts_with("digraph"));
}

#[test]
fn json_floats_carry_seventeen_digits() {
    let o = qpl(&["denote", &program("teleport.qpl"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let floats: Vec<&str> = text
        .split(|ch: char| !(ch.is_ascii_digit() || "+-.e".contains(ch)))
        .filter(|t| t.contains('.'))
        .collect();
    assert!(!floats.is_empty());
    for f in floats {
        let (mantissa, _) = f.split_once('e').unwrap_or_else(|| panic!("{f}"));
        assert_eq!(mantissa.trim_start_matches('-').len(), 18, "{f}");
    }
}

#[test]
fn verify_passes_and_fails_with_the_right_codes() {
    let o = qpl(&["verify", &program("teleport.qpl"), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["status"], "pass");

    let dir = tempfile::tempdir().unwrap();
    let gates = write(dir.path(), "gates.json", r#"{ "K": { "arity": 1, "matrix": [[[1,0],[1,0]],[[0,0],[1,0]]] } }"#);
    let o = qpl(&["verify", &program("teleport.qpl"), "--gates", &gates]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(qpl(&["run", &program("teleport.qpl"), "--gates", &gates]).status.code(), Some(1));
}

#[test]
fn truncation_is_a_warning() {
    let o = qpl(&["verify", &program("ghz.qpl"), "--depth", "2", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let j: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(j["status"], "warn");
}

#[test]
fn capacity_is_a_runtime_error() {
    let o = qpl(&["run", &program("ghz.qpl"), "--max-qubits", "2"]);
    assert_eq!(o.status.code(), Some(3));
}
