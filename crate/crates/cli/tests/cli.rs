use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnlab")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

fn gen(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_str().unwrap().to_string();
    let mut all = vec!["gen", "--out", &path];
    all.extend_from_slice(args);
    let out = rnlab(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn test_exit_codes_follow_the_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = gen(dir.path(), "c6.json", &["--family", "cycle", "--n", "6"]);
    let tree = gen(dir.path(), "t.json", &["--family", "binary_tree", "--depth", "8", "--beta", "0.6931"]);

    let out = rnlab(&["test", "--property", "forest", "--epsilon", "0.2", "--K", "2", "--seed", "5", "--graph", &c6]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["verdict"], "REJECT");

    let out = rnlab(&["test", "--property", "forest", "--epsilon", "0.2", "--seed", "5", "--graph", &tree]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["verdict"], "ACCEPT");

    let out = rnlab(&["test", "--property", "bipartite", "--epsilon", "0.2", "--observing", "--graph", &c6]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["mode"], "observing");

    let out = rnlab(&["test", "--property", "forest", "--epsilon", "0.2", "--K", "1.5", "--graph", &tree]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ratio bound"));
}

#[test]
fn distances_match_known_values() {
    let dir = tempfile::tempdir().unwrap();
    let c5 = gen(dir.path(), "c5.json", &["--family", "cycle", "--n", "5"]);
    let out = json(&rnlab(&["dist", "--property", "forest", "--graph", &c5]));
    assert!((out["distance"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert_eq!(out["witness_deletion_set"].as_array().unwrap().len(), 1);
    let out = json(&rnlab(&["dist", "--property", "forest", "--graph", &c5, "--absolute", "--K", "2"]));
    assert_eq!(out["exact"], "2/5");
}

#[test]
fn sampling_is_reproducible_and_counts_add_up() {
    let dir = tempfile::tempdir().unwrap();
    let tree = gen(dir.path(), "t.json", &["--family", "binary_tree", "--depth", "7"]);
    let args = ["sample", "--r", "2", "--t", "1", "--queries", "5000", "--seed", "7", "--graph", &tree];
    let a = rnlab(&args);
    let b = rnlab(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let total: u64 = String::from_utf8(a.stdout)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str::<Value>(l).unwrap()["count"].as_u64().unwrap())
        .sum();
    assert_eq!(total, 5000);
}

#[test]
fn scenario_reports_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"scenario": "phase_transition", "params": {"betas": [0.0, 0.6931471805599453], "depth": 10, "samples": 20000}, "seed": 3}"#,
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let one = rnlab(&["--threads", "1", "scenario", cfg]);
    let four = rnlab(&["--threads", "4", "scenario", cfg]);
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, four.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    assert!(text.lines().count() >= 2);
    for line in text.lines() {
        let row: Value = serde_json::from_str(line).unwrap();
        assert_eq!(row["scenario"], "phase_transition");
        assert_eq!(row["seed"], 3);
    }
}

#[test]
fn csv_projection_has_one_record_per_row() {
    let jsonl = rnlab(&["scenario", "--name", "entropy_sweep", "--params", r#"{"depths": [10, 20]}"#]);
    let csv = rnlab(&["scenario", "--name", "entropy_sweep", "--params", r#"{"depths": [10, 20]}"#, "--csv"]);
    assert!(csv.status.success());
    let rows = String::from_utf8(jsonl.stdout).unwrap().lines().count();
    let text = String::from_utf8(csv.stdout).unwrap();
    assert_eq!(text.lines().count(), rows + 1);
    assert!(text.lines().next().unwrap().contains("edge_entropy"));
}

#[test]
fn config_file_supplies_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.json");
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, format!(r#"{{"seed": 4, "out": {:?}}}"#, out.to_str().unwrap())).unwrap();
    let res = rnlab(&["--config", cfg.to_str().unwrap(), "gen", "--family", "random_regular", "--n", "12"]);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let direct = rnlab(&["--seed", "4", "gen", "--family", "random_regular", "--n", "12"]);
    assert_eq!(std::fs::read(&out).unwrap(), direct.stdout);
}

#[test]
fn estimates_and_partitions() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen(dir.path(), "p.json", &["--family", "path", "--n", "200"]);
    let est = json(&rnlab(&["estimate", "--what", "independence", "--epsilon", "0.1", "--graph", &p]));
    assert!((est["value"].as_f64().unwrap() - 0.5).abs() < 0.05);
    let m = json(&rnlab(&["estimate", "--what", "matching", "--epsilon", "0.1", "--graph", &p]));
    assert!((m["value"].as_f64().unwrap() - 0.5).abs() < 0.05);
    let cert = json(&rnlab(&["partition", "--epsilon", "0.1", "--graph", &p]));
    assert!(cert["component_sizes"][0].as_u64().unwrap() <= 19);
    let cover = json(&rnlab(&["partition", "--epsilon", "0.1", "--graph", &p, "--cover", "path"]));
    assert_eq!(cover["covers"].as_array().unwrap().len(), 20);
}

#[test]
fn stats_and_distance() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a.json", &["--family", "cycle", "--n", "30"]);
    let b = gen(dir.path(), "b.json", &["--family", "cycle", "--n", "40"]);
    let c = gen(dir.path(), "c.json", &["--family", "path", "--n", "4"]);
    let st = json(&rnlab(&["stats", "--exact", "--r", "2", "--t", "1", "--graph", &a]));
    assert_eq!(st["entries"].as_array().unwrap().len(), 1);
    let same = json(&rnlab(&["distance", "--rmax", "3", &a, &b]));
    assert!(same["d_s"].as_f64().unwrap() < 1e-12);
    let apart = json(&rnlab(&["distance", "--rmax", "3", &a, &c]));
    assert!(apart["d_s"].as_f64().unwrap() > 0.1);
    let h = json(&rnlab(&["stats", "--entropy", "--graph", &a]));
    assert_eq!(h["units"], "nats");
    assert!((h["vertex_entropy"].as_f64().unwrap() - 30f64.ln()).abs() < 1e-12);
}

#[test]
fn observe_table_lists_induced_cycles() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = gen(dir.path(), "c4.json", &["--family", "cycle", "--n", "4"]);
    let t = json(&rnlab(&["observe", "--s", "4", "--graph", &c4]));
    let entries = t["entries"].as_object().unwrap();
    assert_eq!(entries.values().filter(|v| v.as_bool().unwrap()).count(), 4);
}

#[test]
fn bad_input_fails_cleanly() {
    let out = rnlab(&["dist", "--property", "planar", "--graph", "missing.json"]);
    assert_eq!(out.status.code(), Some(2));
    let out = rnlab(&["stats", "--graph", "missing.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
}
