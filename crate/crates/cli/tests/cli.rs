use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = r#"
schema = 1
name = "small"
seed = 3
x = "|10"
schedule = [
  { task = "add_domain", a = 1 },
  { task = "meet" },
  { task = "add_domain", a = 2 },
  { task = "meet" },
]

[tower]
prefixes = ["0000", "00001"]
capacity = 128

[b_side]
count = 2
prefixes = ["1"]
classes = 2

[medini]
schedule = [
  { task = "add_point", a = 1 },
  { task = "fix_bit" },
  { task = "fix_bit" },
]
"#;

fn towerforce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_towerforce")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn untimed(json: &str) -> Value {
    let mut v: Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("timing");
    v
}

#[test]
fn run_then_check() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "small.toml", SMALL);
    let out = dir.path().join("small.json");
    let o = towerforce(&["run", &sc, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    assert!(text(&o.stderr).contains("pass poset.certificates"));
    let o = towerforce(&["check", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o.stdout));
    assert!(text(&o.stdout).contains("4 certificates"));
}

#[test]
fn reruns_are_identical_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "small.toml", SMALL);
    let a = towerforce(&["run", &sc]);
    let b = towerforce(&["run", &sc]);
    assert_eq!(untimed(&text(&a.stdout)), untimed(&text(&b.stdout)));
}

#[test]
fn finite_x_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "bad.toml", &SMALL.replace("x = \"|10\"", "x = \"101|0\""));
    let o = towerforce(&["run", &sc]);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("X must be infinite-coinfinite"), "{}", text(&o.stderr));
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "bad.toml", &SMALL.replace("seed = 3", "seed = 3\ncolour = 1"));
    assert_eq!(code(&towerforce(&["run", &sc])), 2);
}

#[test]
fn flipped_rational_fails_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let sc = write(dir.path(), "small.toml", SMALL);
    let o = towerforce(&["run", &sc]);
    let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let slot = &mut v["poset"]["certificates"][0]["entries"][0]["s_interval"];
    let s = slot.as_str().unwrap().to_string();
    let d = s.as_bytes()[1];
    *slot = Value::String(format!("{}{}{}", &s[..1], if d == b'5' { '3' } else { '5' }, &s[2..]));
    let bad = write(dir.path(), "bad.json", &serde_json::to_string_pretty(&v).unwrap());
    let o = towerforce(&["check", &bad]);
    assert_eq!(code(&o), 1);
    assert!(text(&o.stdout).contains("poset.certificates[0]"), "{}", text(&o.stdout));
}

#[test]
fn malformed_report_is_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(code(&towerforce(&["check", &bad])), 2);
}

#[test]
fn empty_demo_is_vacuous() {
    let o = towerforce(&["demo", "empty"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["poset"]["condition"], Value::Array(vec![]));
    assert_eq!(v["poset"]["certificates"], Value::Array(vec![]));
}

#[test]
fn medini_demo_checks() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.json");
    assert_eq!(code(&towerforce(&["demo", "medini", "--out", out.to_str().unwrap()])), 0);
    assert_eq!(code(&towerforce(&["check", out.to_str().unwrap()])), 0);
}

#[test]
fn tower16_demo() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t.json");
    let o = towerforce(&["demo", "tower16", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", text(&o.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["poset"]["certificates"].as_array().unwrap().len(), 12);
    assert_eq!(v["poset"]["witnessed"].as_array().unwrap().len(), 12);
    assert_eq!(code(&towerforce(&["check", out.to_str().unwrap()])), 0);
}

#[test]
fn unknown_demo_lists_names() {
    let o = towerforce(&["demo", "nope"]);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("tower16"));
}

#[test]
fn caps_flags_override() {
    let o = towerforce(&["demo", "tower16", "--search-cap", "0"]);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("caps"), "{}", text(&o.stderr));
}

#[test]
fn suite_verbs() {
    let o = towerforce(&["suite", "cantor.fact3"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stdout));
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], 11);
    let o = towerforce(&["suite", "poset.axioms", "--trials", "300", "--seed", "5"]);
    assert_eq!(code(&o), 0, "{}", text(&o.stdout));
    let o = towerforce(&["suite", "nope"]);
    assert_eq!(code(&o), 2);
    assert!(text(&o.stderr).contains("cantor.fact3"));
}
