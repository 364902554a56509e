use std::process::{Command, Output};

use igs_core::analysis::conformal_dimension;
use igs_core::io::{bundled, parse_spec};
use serde_json::Value;

fn igs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_igs")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON report on stdout")
}

#[test]
fn confdim_of_the_counterexample() {
    let out = igs(&["confdim", "counterexample", "--tol", "1e-9", "--no-timings"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["schema"], "igs-report/1");
    assert_eq!(doc["command"], "confdim");
    let q = doc["results"]["q"].as_f64().unwrap();
    assert!((q - 1.5).abs() <= 1e-9);
    let direct = conformal_dimension(&bundled("counterexample").unwrap().igs, 1e-9).unwrap();
    assert_eq!(q, direct.q, "numbers survive serialization exactly");
    assert_eq!(doc["certificates"]["bracket_check"]["holds"], true);
    assert!(doc.get("timings").is_none());
}

#[test]
fn report_verdicts() {
    let out = igs(&["report", "counterexample", "--no-timings"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["certificates"]["verdict"], "non-attainment counterexample");
    assert_eq!(doc["results"]["certified_edge"], serde_json::json!([4, 5]));
    let out = igs(&["report", "laakso_n2_l4", "--no-timings"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["results"]["positive"], false);
}

#[test]
fn assumption_failure_exits_with_one() {
    let out = igs(&["confdim", "laakso_diamond"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["error"]["kind"], "AssumptionFailure");
    assert!(doc["error"]["message"].as_str().unwrap().contains("two edge-disjoint paths"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(igs(&["frobnicate", "counterexample"]).status.code(), Some(2));
    assert_eq!(igs(&["export", "counterexample", "--format", "svg"]).status.code(), Some(2));
    assert_eq!(igs(&["confdim", "no_such_example"]).status.code(), Some(2));
    assert_eq!(igs(&["modulus", "counterexample", "--p", "2", "--from", "1"]).status.code(), Some(2));
    assert_eq!(igs(&["removable", "counterexample", "--edge", "4"]).status.code(), Some(2));
}

#[test]
fn reports_are_deterministic_without_timings() {
    for args in [
        &["report", "counterexample", "--no-timings"][..],
        &["modulus", "counterexample", "--p", "1.5", "--from", "1,2", "--to", "7,8", "--level", "2", "--no-timings"][..],
        &["evidence", "counterexample", "--p", "2", "--no-timings"][..],
    ] {
        let a = igs(args);
        let b = igs(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let timed = json(&igs(&["validate", "counterexample"]));
    assert!(timed["timings"]["seconds"].as_f64().is_some());
}

#[test]
fn export_formats() {
    let out = igs(&["export", "counterexample", "--level", "2", "--format", "edgelist"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')).count(), 81);
    let dot = String::from_utf8(igs(&["export", "counterexample", "--format", "dot"]).stdout).unwrap();
    assert!(dot.starts_with("graph") || dot.contains("graph "));
    assert_eq!(dot.matches(" -- ").count(), 9);
    assert!(matches!(igs(&["export", "counterexample", "--level", "9", "--budget-edges", "1000"]).status.code(), Some(1)));
}

#[test]
fn subigs_output_parses_back() {
    let doc = json(&igs(&["subigs", "counterexample", "--edge", "4,5", "--no-timings"]));
    let spec = parse_spec(doc["results"]["spec"].as_str().unwrap()).unwrap();
    assert_eq!(spec.igs.base().edge_count(), 8);
    assert_eq!(spec.igs.base(), bundled("laakso_n2_l4").unwrap().igs.base());
}

#[test]
fn modulus_and_walkdim_values() {
    let doc = json(&igs(&["modulus", "counterexample", "--p", "2", "--from", "1,2", "--to", "7,8", "--no-timings"]));
    assert!((doc["results"]["value"].as_f64().unwrap() - 0.5).abs() <= 1e-10);
    assert!(doc["certificates"]["duality_residual"].as_f64().unwrap() <= 1e-8);
    let doc = json(&igs(&["walkdim", "laakso_n2_l4", "--p", "1.5,3", "--no-timings"]));
    let walks = doc["results"].as_array().unwrap();
    assert_eq!(walks.len(), 2);
    assert!(walks.iter().all(|w| w["equality"] == true));
}

#[test]
fn parse_errors_exit_with_one_and_carry_a_location() {
    let dir = std::env::temp_dir().join(format!("igs-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("dup.igs");
    std::fs::write(&path, "[graph]\nvertices = [1, 2]\nedges = [[1, 2], [1, 2]]\n[gluing]\nset = [\"a\"]\n").unwrap();
    let out = igs(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = json(&out);
    assert_eq!(doc["error"]["kind"], "ParseError");
    assert!(doc["error"]["message"].as_str().unwrap().contains("line 3"));

    let report = dir.join("report.json");
    let out = igs(&["validate", "counterexample", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(written["results"]["edges"], 9);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn porosity_command() {
    let doc = json(&igs(&["porosity", "counterexample", "--levels", "1", "--no-timings"]));
    assert_eq!(doc["certificates"]["verified"], true);
    assert_eq!(doc["certificates"]["constant"].as_f64().unwrap(), 1.0 / 1024.0);
    assert_eq!(igs(&["porosity", "laakso_n2_l4"]).status.code(), Some(1));
}
