use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn elasticity(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elasticity")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn jsonl(out: &Output) -> Vec<Value> {
    String::from_utf8_lossy(&out.stdout).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn default_identity_run_passes() {
    let out = elasticity(&["verify-identities"]);
    assert_eq!(out.status.code(), Some(0));
    let lines = jsonl(&out);
    assert_eq!(lines[0]["command"], "verify-identities");
    assert_eq!(lines[0]["seed"], 2024);
    assert_eq!(lines.last().unwrap()["summary"]["cases"], 28);
    assert_eq!(lines.len(), 30);
}

#[test]
fn single_identity_and_mutation() {
    let out = elasticity(&["verify-identities", "--only", "ELA-A12"]);
    assert_eq!(out.status.code(), Some(0));
    let lines = jsonl(&out);
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[1]["id"], "ELA-A12");

    let out = elasticity(&["verify-identities", "--mutate", "--trials", "5"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(jsonl(&out).last().unwrap()["summary"]["failed"], 28);
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(elasticity(&["verify-identities", "--only", "NOPE"]).status.code(), Some(2));
    assert_eq!(elasticity(&["complex", "--p", "3"]).status.code(), Some(2));
    assert_eq!(elasticity(&["complex", "--gt", "X7"]).status.code(), Some(2));
    assert_eq!(elasticity(&["fixture", "/nonexistent.json"]).status.code(), Some(2));
    for (name, text) in [("truncated.json", "{\"p\": "), ("unknown.json", "{\"p\": 4, \"bogus\": 1}")] {
        let path = scratch(name);
        std::fs::write(&path, text).unwrap();
        let out = elasticity(&["complex", "--config", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{name}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("invalid configuration"));
    }
}

#[test]
fn config_file_and_flags_combine() {
    let path = scratch("config.json");
    std::fs::write(&path, r#"{"p": 5, "gt": "all", "seed": 7}"#).unwrap();
    let out = elasticity(&["complex", "--config", path.to_str().unwrap(), "--p", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["header"]["config"]["p"], 4);
    assert_eq!(v["header"]["seed"], 7);
    assert_eq!(v["results"][0]["gt"], "all");
}

#[test]
fn free_complex_has_rigid_motions() {
    let out = elasticity(&["complex", "--p", "4", "--gt", "none"]);
    assert_eq!(out.status.code(), Some(0));
    let r = &json(&out)["results"][0];
    assert_eq!(r["kernel_dims"][0], 6);
    assert_eq!(r["exact_complex_property"], true);
    assert_eq!(r["cohomology_dims"], serde_json::json!([6, 0, 0, 0]));
}

#[test]
fn weights_leave_cohomology_alone() {
    let dims = |w: &str| {
        let out = elasticity(&["complex", "--p", "4", "--gt", "X0", "--weights", w]);
        assert_eq!(out.status.code(), Some(0));
        json(&out)["results"][0]["cohomology_dims"].clone()
    };
    assert_eq!(dims("identity"), dims("random"));
}

#[test]
fn fixtures_report_betti_numbers() {
    for (name, betti) in [("solid_box", [1, 0, 0, 0]), ("solid_torus", [1, 1, 0, 0])] {
        let out = elasticity(&["fixture", &fixture(name)]);
        assert_eq!(out.status.code(), Some(0), "{name}");
        assert_eq!(json(&out)["results"]["betti_numbers"], serde_json::json!(betti));
    }
    let out = elasticity(&["fixture", "--fixture", &fixture("broken_complex")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("|A1 A0|_max"));
}

#[test]
fn other_verbs_pass() {
    for args in [
        vec!["helmholtz", "--p", "4", "--gt", "X0,X1", "--samples", "10"],
        vec!["poincare", "--p", "4", "--gt", "all"],
        vec!["korn", "--p", "2", "--p-max", "3", "--gt", "X0"],
    ] {
        let out = elasticity(&args);
        assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(json(&out)["passed"], true);
    }
}

#[test]
fn csv_output() {
    let out = elasticity(&["complex", "--p", "4", "--gt", "all", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("p,gt,weights,dims"));
    assert!(lines.next().unwrap().starts_with("4,all,identity,81;81;0;3"));
}

#[test]
fn runs_are_byte_identical() {
    // the output path is part of the embedded config, so both runs use the same one
    let path = scratch("run.json");
    let mut reports = Vec::new();
    for _ in 0..2 {
        let out = elasticity(&["complex", "--p", "4", "--gt", "X0", "--weights", "random", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!(out.stdout.is_empty());
        reports.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(elasticity(&["verify-identities", "--seed", "9"]).stdout, elasticity(&["verify-identities", "--seed", "9"]).stdout);
}

#[test]
fn registry_listing_matches_shipped_file() {
    let out = elasticity(&["list-identities"]);
    let shipped = std::fs::read(concat!(env!("CARGO_MANIFEST_DIR"), "/../../identities.json")).unwrap();
    assert_eq!(out.stdout, shipped);
}
