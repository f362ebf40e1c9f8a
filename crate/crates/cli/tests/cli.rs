//! End-to-end checks of the `schedlab` binary: exit codes and output shape.

use std::path::PathBuf;
use std::process::{Command, Output};

fn schedlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schedlab")).args(args).output().expect("binary runs")
}

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("schedlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn exit_codes() {
    assert_eq!(schedlab(&["--help"]).status.code(), Some(0));
    assert_eq!(schedlab(&["--version"]).status.code(), Some(0));
    assert_eq!(schedlab(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(schedlab(&["simulate", "--mech", "nope", &data("arrival-exhibit.json")]).status.code(), Some(3));
    assert_eq!(schedlab(&["simulate", "--mech", "at", "/no/such/file.json"]).status.code(), Some(3));
    let bad = schedlab(&["simulate", "--mech", "at", "--params", "gamma=1,mu=2", &data("arrival-exhibit.json")]);
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stderr).starts_with("error:"));
}

#[test]
fn simulate_emits_outcomes() {
    let out = schedlab(&["simulate", "--mech", "at", "--servers", "1", "--params", "auto", "--payments", &data("arrival-exhibit.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["outcomes"].as_array().unwrap().len(), 2);
    assert!(v["segments"].as_array().is_some());
}

#[test]
fn monotone_flags_the_baseline_only() {
    let b1 = data("b1-counterexample.json");
    assert_eq!(schedlab(&["monotone", "--mech", "greedy-baseline", "--instance", &b1]).status.code(), Some(2));
    assert_eq!(schedlab(&["monotone", "--mech", "greedy-baseline", "--instance", &data("b1-counterexample-rho1.json")]).status.code(), Some(2));
    assert_eq!(schedlab(&["monotone", "--mech", "at", "--instance", &b1]).status.code(), Some(0));
}

#[test]
fn gen_is_deterministic_and_loadable() {
    let a = schedlab(&["gen", "--n", "6", "--s", "8", "--seed", "11"]);
    let b = schedlab(&["gen", "--n", "6", "--s", "8", "--seed", "11"]);
    assert_eq!(a.stdout, b.stdout);
    let path = scratch("gen.json", &stdout(&a));
    let out = schedlab(&["simulate", "--mech", "at", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn ratio_rows_are_reproducible_from_their_seed() {
    let out = schedlab(&["ratio", "--mech", "committed-single", "--omega", "1/2", "--n", "8", "--trials", "200", "--s", "8"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "seed,n,s,mechanism,params,mech_value,opt_value,ratio,bound,min_lead_add,min_lead_mult,broken_commitments");
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| r.len() == 12 && r[11] == "0"));

    let row = &rows[17];
    let inst = schedlab(&["gen", "--n", "8", "--s", "8", "--seed", row[0]]);
    let path = scratch("row.json", &stdout(&inst));
    let sim = schedlab(&["simulate", "--mech", "committed-single", "--omega", "1/2", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&sim)).unwrap();
    assert_eq!(v["completed_value"].as_str().unwrap(), row[5]);
}

#[test]
fn bounds_table_is_nonincreasing() {
    let out = schedlab(&["bounds", "--family", "committed-single", "--from", "5", "--to", "40"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.rsplit(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 36);
    assert!(values.windows(2).all(|w| w[1] <= w[0]));
    let at = schedlab(&["bounds", "--family", "at", "--from", "8", "--to", "8"]);
    assert!(stdout(&at).contains("8,at,gamma=2;mu=4,9,"));
}

#[test]
fn adversary_transcripts() {
    let naive = schedlab(&["adversary", "--scheduler", "naive", "--s", "3"]);
    assert_eq!(naive.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&naive)).unwrap();
    assert_eq!(v["outcome"]["kind"], "overcommitted");

    let refused = schedlab(&["adversary", "--scheduler", "committed-single", "--s", "3"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&refused)).unwrap();
    assert_eq!(v["outcome"]["kind"], "not-applicable");
}

#[test]
fn dual_check_certifies_and_rejects() {
    let inst = data("arrival-exhibit.json");
    // alpha = rho for both jobs of the exhibit: 1/1 and 10/2.
    let good = scratch("good.json", r#"{"alpha": {"1": "1", "2": "5"}, "beta": [[["0", "0"]]]}"#);
    let out = schedlab(&["dual-check", "--instance", &inst, "--dual", good.to_str().unwrap(), "--mech-value", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["certified_ratio"], "11/10");

    let bad = scratch("bad.json", r#"{"alpha": {}, "beta": [[["0", "0"]]]}"#);
    let out = schedlab(&["dual-check", "--instance", &inst, "--dual", bad.to_str().unwrap(), "--mech-value", "10"]);
    assert_eq!(out.status.code(), Some(2));
}
