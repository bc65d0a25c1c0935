use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn calderon(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_calderon"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("mu.json"), r#"{"breakpoints":[1.0],"values":[1.0]}"#).unwrap();
    fs::write(dir.path().join("x.json"), r#"{"breakpoints":[1,2,3],"values":[1,-3,2]}"#).unwrap();
    fs::write(dir.path().join("seq.json"), r#"{"offset":0,"entries":[1,0.5,0.25]}"#).unwrap();
    fs::write(dir.path().join("ones.json"), r#"{"n":2,"re":[[1,1],[1,1]]}"#).unwrap();
    fs::write(dir.path().join("a.json"), r#"{"n":2,"re":[[1,0],[0,-1]]}"#).unwrap();
    fs::write(dir.path().join("b.json"), r#"{"n":2,"re":[[0,1],[1,0]]}"#).unwrap();
    dir
}

#[test]
fn norm_of_indicator_in_weak_l1() {
    let dir = setup();
    let out = calderon(&["norm", "--space", "weak-l1", "--in", "mu.json"], dir.path());
    assert!(out.status.success());
    assert_eq!(json(&out)["value"], 1.0);
}

#[test]
fn sequence_input_uses_the_discrete_norm() {
    let dir = setup();
    let out = calderon(&["norm", "--space", "weak-l1", "--in", "seq.json"], dir.path());
    let v = json(&out);
    assert_eq!(v["space"], "d:weak-l1");
    // max (n+1) μ(n) = max(1, 1, 0.75)
    assert_eq!(v["value"], 1.0);
}

#[test]
fn rearrange_sorts_pieces() {
    let dir = setup();
    let v = json(&calderon(&["rearrange", "--in", "x.json"], dir.path()));
    assert_eq!(v["values"], serde_json::json!([3.0, 2.0, 1.0]));
}

#[test]
fn apply_and_csv_precision() {
    let dir = setup();
    let out = calderon(&["apply", "--op", "calderon", "--in", "mu.json", "--grid", "0.5,2", "--csv"], dir.path());
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,value");
    // S χ(0.5) = 1 + log 2, 17 significant digits
    let v: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert_eq!(v, 1.0 + 2f64.ln());
    assert_eq!(lines[1].split(',').nth(1).unwrap().split('e').next().unwrap().len(), 18);
}

#[test]
fn hilbert_rejects_breakpoints() {
    let dir = setup();
    let out = calderon(&["apply", "--op", "hilbert", "--in", "mu.json", "--grid", "1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn svd_and_truncate() {
    let dir = setup();
    let v = json(&calderon(&["svd", "--in", "ones.json"], dir.path()));
    let s: Vec<f64> = serde_json::from_value(v["sigma"].clone()).unwrap();
    assert!((s[0] - 2.0).abs() < 1e-14 && s[1].abs() < 1e-14);
    let t = json(&calderon(&["truncate", "--in", "ones.json"], dir.path()));
    assert_eq!(t["re"], serde_json::json!([[0.0, -1.0], [1.0, 0.0]]));
}

#[test]
fn commutator_check_through_doi() {
    let dir = setup();
    let out = calderon(&["doi", "--a", "a.json", "--b", "b.json", "--f", "abs"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["contraction_holds"], true);
    // |A| = I commutes with B
    assert_eq!(v["lhs"], 0.0);
}

#[test]
fn verify_lemma_exact_pass() {
    let dir = setup();
    let out = calderon(&["verify", "lem-4.5", "--trials", "1000", "--seed", "7"], dir.path());
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["verdict"], "exact-pass");
    assert_eq!(v["trials"], 1000);
}

#[test]
fn verify_all_writes_report_and_rows() {
    let dir = setup();
    let out = calderon(&["verify", "all", "--seed", "1", "--out", "report.json"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert_eq!(report["reports"].as_array().unwrap().len(), 10);
    let rows = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    assert!(rows.starts_with("theorem_id,part,size,trial,ratio,pass\n"));
    assert!(rows.lines().count() > 3000);
}

#[test]
fn compare_mode_is_byte_identical() {
    let dir = setup();
    let args = ["verify", "thm-2.8", "--seed", "11", "--trials", "10", "--sizes", "8,16", "--compare"];
    let a = calderon(&args, dir.path());
    let b = calderon(&args, dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(json(&a).get("metadata").is_none());
    assert!(json(&calderon(&args[..8], dir.path())).get("metadata").is_some());
}

#[test]
fn regression_failure_exits_one() {
    // 1×1 matrices have T V = 0, so any larger size breaks the 2× rule
    let dir = setup();
    let out = calderon(&["verify", "thm-3.3ii", "--seed", "1", "--sizes", "1,8", "--trials", "4"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["verdict"], "fail");
}

#[test]
fn usage_errors_exit_two() {
    let dir = setup();
    assert_eq!(calderon(&["verify", "lem-4.5"], dir.path()).status.code(), Some(2));
    assert_eq!(calderon(&["frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(calderon(&["norm", "--space", "lp:0.5", "--in", "mu.json"], dir.path()).status.code(), Some(2));
    assert_eq!(calderon(&["norm", "--space", "l1", "--in", "missing.json"], dir.path()).status.code(), Some(2));
    assert_eq!(calderon(&["verify", "thm-9.9", "--seed", "1"], dir.path()).status.code(), Some(2));
}

#[test]
fn config_file_supplies_and_rejects_keys() {
    let dir = setup();
    fs::write(dir.path().join("run.cfg"), "# lemma run\nseed = 7\ntrials = 50\n").unwrap();
    let out = calderon(&["--config", "run.cfg", "verify", "lem-4.5"], dir.path());
    assert!(out.status.success());
    assert_eq!(json(&out)["trials"], 50);
    // flags override the file
    let out = calderon(&["--config", "run.cfg", "verify", "lem-4.5", "--trials", "5"], dir.path());
    assert_eq!(json(&out)["trials"], 5);
    fs::write(dir.path().join("bad.cfg"), "seed = 7\ntolerance_x = 1\n").unwrap();
    let out = calderon(&["--config", "bad.cfg", "verify", "lem-4.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown key"));
}

#[test]
fn fnorm_emits_value_witness_certificate() {
    let dir = setup();
    let v = json(&calderon(&["fnorm", "--in", "mu.json", "--space", "l1", "--depth", "2"], dir.path()));
    assert!(v["value"].as_f64().unwrap() <= 1.0 + 1e-12);
    assert_eq!(v["certificate"]["feasible"], true);
    assert!(v["witness"]["breakpoints"].is_array());
}

#[test]
fn hilbert_window_accepts_negative_bounds() {
    let dir = setup();
    let out = calderon(&["apply", "--op", "hilbert-d", "--in", "seq.json", "--window", "-2:2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
