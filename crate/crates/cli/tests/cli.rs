use serde_json::Value;
use std::path::Path;
use std::process::{Command, Output};

fn graphcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_graphcalc")).args(args).output().unwrap()
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut all = vec!["gen"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["-o", &path]);
    assert!(graphcalc(&all).status.success());
    path
}

fn read_json(path: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn grid_generator_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let g = read_json(&gen(dir.path(), "g.json", &["grid", "--dim", "2", "--side", "16"]));
    assert_eq!(g["vertices"], 256);
}

#[test]
fn dumbbell_has_one_bridge() {
    let dir = tempfile::tempdir().unwrap();
    let g = read_json(&gen(dir.path(), "d.json", &["dumbbell", "--side", "5"]));
    assert_eq!(g["vertices"], 50);
    let crossing = g["edges"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| (e[0].as_u64().unwrap() < 25) != (e[1].as_u64().unwrap() < 25))
        .count();
    assert_eq!(crossing, 1);
}

#[test]
fn spectrum_of_the_lazy_four_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "c.json", &["cycle", "--n", "4", "--self", "2"]);
    let bundle = json_of(&graphcalc(&["check", "spectrum", "--graph", &g]));
    let rows = bundle["checks"][0]["report"]["rows"].as_array().unwrap();
    let mut eig: Vec<f64> = rows.iter().map(|r| r["y"].as_f64().unwrap()).collect();
    eig.sort_by(f64::total_cmp);
    for (a, b) in eig.iter().zip([0.0, 0.5, 0.5, 1.0]) {
        assert!((a - b).abs() < 1e-12, "{eig:?}");
    }
}

#[test]
fn riesz_at_two_is_exactly_one() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "g.json", &["grid", "--dim", "2", "--side", "6"]);
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"graph":{"file":"g.json"},"suite":[{"check":"RP","p":2.0}]}"#).unwrap();
    let out = dir.path().join("out");
    let status = graphcalc(&["check", config.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(status.status.success());
    let bundle: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let report = &bundle["checks"][0]["report"];
    assert_eq!(report["verdict"], "PASS");
    assert_eq!(report["constants"][0]["value"].as_f64(), Some(1.0));
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.starts_with("schema,check,series,x,y\n"));
    assert!(csv.contains("RP,constant/C_p,,1.000000000000e0"));
    assert!(out.join("timings.json").is_file());

    let riesz = json_of(&graphcalc(&["riesz", "--graph", &g, "--strategy", "exact"]));
    assert_eq!(riesz["constants"][0]["value"].as_f64(), Some(1.0));
    let bad = graphcalc(&["riesz", "--graph", &g, "--p", "4", "--strategy", "exact"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn large_alpha_gives_the_trivial_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "g.json", &["grid", "--dim", "2", "--side", "4"]);
    let mut csv = String::from("index,value\n");
    for i in 0..16 {
        csv += &format!("{i},{}\n", (i as f64 * 0.7).sin());
    }
    let f = dir.path().join("f.csv");
    std::fs::write(&f, csv).unwrap();
    let dec = json_of(&graphcalc(&["czd", "--graph", &g, "--function", f.to_str().unwrap(), "--alpha", "1e6"]));
    assert_eq!(dec["trivial"], true);
    assert!(dec["bad"].as_array().unwrap().is_empty());
    let good: Vec<f64> = dec["good"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert!((good[3] - (3.0f64 * 0.7).sin()).abs() < 1e-12);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "g.json", &["grid", "--dim", "2", "--side", "5"]);
    let run = |seed: &str| graphcalc(&["check", "rp,pi,kfunc", "--graph", &g, "--seed", seed]).stdout;
    assert_eq!(run("7"), run("7"));
    assert_ne!(run("7"), run("8"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen(dir.path(), "d.json", &["dumbbell", "--side", "3"]);
    assert_eq!(graphcalc(&["check", "nonsense", "--graph", &g]).status.code(), Some(2));
    assert_eq!(graphcalc(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(graphcalc(&["check", "rp", "--graph", "/nonexistent/g.json"]).status.code(), Some(4));
    let raised = graphcalc(&["check", "gaffney,spectrum", "--graph", &g]);
    assert_eq!(raised.status.code(), Some(3));
    let bundle: Value = serde_json::from_slice(&raised.stdout).unwrap();
    assert_eq!(bundle["checks"][0]["status"], "error");
    assert_eq!(bundle["checks"][1]["status"], "ok");
}
