use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn germlab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_germlab"))
        .current_dir(dir)
        .args(args)
        .env_remove("GERMLAB_SEED")
        .output()
        .expect("run germlab")
}

fn json(dir: &Path, file: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join(file)).unwrap()).unwrap()
}

#[test]
fn build_example1_and_read_its_nesting() {
    let dir = tempfile::tempdir().unwrap();
    let out = germlab(dir.path(), &["build", "example1", "--k", "5", "--out", "ex1.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let sheets = |f: &str| -> Vec<String> {
        json(dir.path(), f)["sheets"].as_array().unwrap().iter().map(|s| s["name"].as_str().unwrap().to_owned()).collect()
    };
    assert_eq!(sheets("ex1-x1.json"), ["U1", "U2", "U3"]);
    assert_eq!(sheets("ex1-x2.json"), ["U1", "V2", "V3"]);

    let out = germlab(dir.path(), &["invariants", "ex1-x1.json", "--out", "inv.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(dir.path(), "inv.json");
    assert_eq!(rep["nesting"], "root(2 leaves)");
    assert_eq!(rep["closed"], 3);
    assert_eq!(rep["exponents"][0]["a"], "gamma+");
}

#[test]
fn broken_family_member_has_its_linking_number() {
    let dir = tempfile::tempdir().unwrap();
    assert!(germlab(dir.path(), &["build", "family", "--i", "2", "--out", "x2.json"]).status.success());
    let out = germlab(dir.path(), &["invariants", "x2.json", "--surgery", "break-bridge", "--out", "r.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = json(dir.path(), "r.json");
    assert_eq!(rep["surgery"]["linking_number"], 2);
    assert_eq!(rep["linking"][0]["linking_number"], 2);
}

#[test]
fn bridge_build_accepts_rational_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out = germlab(dir.path(), &["build", "bridge", "--q", "3", "--beta", "2", "--p", "5/2", "--out", "a.json"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(dir.path(), "a.json")["bridges"][0]["broken"], "5/2");
}

#[test]
fn empty_model_gives_an_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("e.json"), r#"{"schema_version":1,"dimension":4,"sheets":[],"arcs":[],"bridges":[]}"#)
        .unwrap();
    let out = germlab(dir.path(), &["invariants", "e.json"]);
    assert_eq!(out.status.code(), Some(0));
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["components"], 0);
    assert!(rep["knots"].as_array().unwrap().is_empty());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(germlab(dir.path(), &["build", "example2"]).status.code(), Some(2));
    assert_eq!(germlab(dir.path(), &["build", "example1", "--k", "4"]).status.code(), Some(2));
    assert_eq!(germlab(dir.path(), &["invariants", "missing.json"]).status.code(), Some(2));
    assert_eq!(germlab(dir.path(), &["verify", "example2"]).status.code(), Some(2));
    assert_eq!(germlab(dir.path(), &["frobnicate"]).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), "{").unwrap();
    assert_eq!(germlab(dir.path(), &["invariants", "bad.json"]).status.code(), Some(2));
}

#[test]
fn corrupted_knot_table_fails_the_property_suite() {
    let dir = tempfile::tempdir().unwrap();
    let mut table: Value = serde_json::from_str(include_str!("../data/knots.json")).unwrap();
    table["knots"][1]["alexander"] = serde_json::json!([1, -2, 1]);
    std::fs::write(dir.path().join("table.json"), table.to_string()).unwrap();
    let out = germlab(dir.path(), &["verify", "properties", "--knot-table", "table.json", "--out", "rep.json"]);
    assert_eq!(out.status.code(), Some(1));
    let rep = json(dir.path(), "rep.json");
    assert_eq!(rep["pass"], false);
    assert!(rep["checks"].as_array().unwrap().iter().any(|c| c["pass"] == false));
}

#[test]
fn seed_environment_variable_overrides_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    assert!(germlab(dir.path(), &["build", "family", "--i", "1", "--out", "x.json"]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_germlab"))
        .current_dir(dir.path())
        .args(["invariants", "x.json", "--seed", "3"])
        .env("GERMLAB_SEED", "9")
        .output()
        .unwrap();
    let rep: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(rep["seed"], 9);
}

#[test]
fn section_exports_obj_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    assert!(germlab(dir.path(), &["build", "example1", "--out", "e.json"]).status.success());
    let obj = germlab(dir.path(), &["section", "e-x1.json", "--format", "obj"]);
    let text = String::from_utf8(obj.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("v ")) && text.lines().any(|l| l.starts_with("l ")));
    let csv = germlab(dir.path(), &["section", "e-x1.json", "--format", "csv"]);
    assert!(String::from_utf8(csv.stdout).unwrap().starts_with("component,closed,x,y,z,t"));
}
