use std::process::{Command, Output};

use serde_json::Value;

fn cfpgn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfpgn"))
        .args(args)
        .env_remove("CFPGN_DEPTH")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn expand_normalizes() {
    let out = cfpgn(&["expand", "10/7"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["normalized"], "3/7");
    assert_eq!(v["quotients"], serde_json::json!(["2", "3"]));
    assert_eq!(v["convergents"].as_array().unwrap().len(), 4);
}

#[test]
fn expand_accepts_decimals_and_quotients() {
    assert_eq!(json(&cfpgn(&["expand", "0.4"]))["bracket"], "[0;2,2]");
    assert_eq!(json(&cfpgn(&["expand", "-0.6"]))["normalized"], "2/5");
    assert_eq!(
        json(&cfpgn(&["expand", "--quotients", "2,3"]))["normalized"],
        "3/7"
    );
}

#[test]
fn decode_prints_both() {
    let out = cfpgn(&["decode", "3/7"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("expanded: [0;2,3]"), "{text}");
    assert!(text.contains("decoded:  [0;2,3]"), "{text}");
}

#[test]
fn decode_reports_truncation() {
    let out = Command::new(env!("CARGO_BIN_EXE_cfpgn"))
        .args(["decode", "13/47"])
        .env("CFPGN_DEPTH", "2")
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(stdout(&out).contains("[0;3,1,...]"));
}

#[test]
fn graph_json() {
    let v = json(&cfpgn(&["graph", "1/2", "--json"]));
    assert_eq!(v["counts"], serde_json::json!([2]));
    assert_eq!(v["q_maxima"].as_array().unwrap().len(), 2);
    assert_eq!(v["q_maxima"][1]["num"], "4");
    assert_eq!(v["truncated"], false);
}

#[test]
fn oracle_at_log_two() {
    let v = json(&cfpgn(&["oracle", "1/2", "--q-ratio", "4"]));
    assert_eq!(v["minima"]["lambda1"]["num"], "1");
    assert_eq!(v["minima"]["lambda2"]["num"], "1");
}

#[test]
fn verify_passes() {
    let out = cfpgn(&["verify", "355/113", "--samples", "4", "--seed", "3"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
    let v = json(&cfpgn(&["verify", "3/7", "--json", "--bound", "200"]));
    assert!(v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["passed"] == true));
    assert!(v.get("elapsed").is_none());
}

#[test]
fn fuzz_smallest() {
    let out = cfpgn(&["fuzz", "--max-den", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["checked"], 2);
    assert_eq!(v["failures"], 0);
}

#[test]
fn fuzz_sampled_is_reproducible() {
    let a = cfpgn(&["fuzz", "--max-den", "80", "--count", "10", "--seed", "5"]);
    let b = cfpgn(&["fuzz", "--max-den", "80", "--count", "10", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["exhaustive"], false);
}

#[test]
fn render_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fig.svg");
    let p = path.to_str().unwrap();
    let out = cfpgn(&["render", "3/7", "-o", p, "--trajectories"]);
    assert!(out.status.success());
    let first = std::fs::read_to_string(&path).unwrap();
    assert!(first.starts_with("<?xml"));
    assert_eq!(first.matches(r#"class="qn""#).count(), 3);
    assert!(first.contains(r#"class="trajectory""#));
    cfpgn(&["render", "3/7", "-o", p, "--trajectories"]);
    assert_eq!(first, std::fs::read_to_string(&path).unwrap());
}

#[test]
fn render_rejects_window_past_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("t.svg");
    let out = cfpgn(&[
        "render",
        "13/47",
        "--depth",
        "1",
        "--qmax",
        "50",
        "-o",
        p.to_str().unwrap(),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncated"));
}

#[test]
fn usage_errors() {
    assert!(!cfpgn(&[]).status.success());
    assert!(!cfpgn(&["expand"]).status.success());
    assert!(!cfpgn(&["expand", "1/0"]).status.success());
    assert!(!cfpgn(&["expand", "abc"]).status.success());
    assert!(!cfpgn(&["expand", "--quotients", "1"]).status.success());
    assert!(!cfpgn(&["fuzz", "--max-den", "1"]).status.success());
}
