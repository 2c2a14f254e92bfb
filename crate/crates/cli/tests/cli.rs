use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn gsd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gsd"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) {
    let out = gsd(dir, args);
    assert!(
        out.status.success(),
        "gsd {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn small_graph(dir: &Path, name: &str, seed: &str) {
    ok(dir, &["gen-csbm", "--nodes", "200", "--seed", seed, "--split", "0.48,0.32", "--out", name]);
}

#[test]
fn generated_bundle_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    small_graph(tmp.path(), "a", "3");
    small_graph(tmp.path(), "b", "3");
    small_graph(tmp.path(), "c", "4");
    for file in ["edges.tsv", "features.csv", "labels.csv", "masks.json", "subgroups.json"] {
        let a = fs::read(tmp.path().join("a").join(file)).unwrap();
        assert_eq!(a, fs::read(tmp.path().join("b").join(file)).unwrap(), "{file}");
    }
    assert_ne!(
        fs::read(tmp.path().join("a/edges.tsv")).unwrap(),
        fs::read(tmp.path().join("c/edges.tsv")).unwrap()
    );
    assert!(!tmp.path().join("a.partial").exists());
}

#[test]
fn report_csvs_have_headers() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_graph(d, "g", "1");
    ok(d, &["homophily", "--bundle", "g", "--hops", "1,2", "--out", "h.csv"]);
    ok(d, &["aggregate", "--bundle", "g", "--hops", "1", "--out", "f.csv"]);
    ok(d, &["disparity", "--bundle", "g", "--out", "d.csv", "--summary", "d.json"]);
    let h = fs::read_to_string(d.join("h.csv")).unwrap();
    assert_eq!(h.lines().next(), Some("node,label,h1,h2"));
    assert_eq!(h.lines().count(), 201);
    let f = fs::read_to_string(d.join("f.csv")).unwrap();
    assert!(f.starts_with("f0,f1,"));
    let disp = fs::read_to_string(d.join("d.csv")).unwrap();
    assert_eq!(disp.lines().next(), Some("node,nearest,distance,hom_gap,score,bin,correct"));
    let summary: Value = serde_json::from_str(&fs::read_to_string(d.join("d.json")).unwrap()).unwrap();
    assert_eq!(summary["bins"].as_array().unwrap().len(), 5);
}

#[test]
fn mmd_from_point_files() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(d.join("x.csv"), "a,b\n1,2\n1,2\n1,2\n").unwrap();
    fs::write(d.join("y.csv"), "a,b\n1,2\n1,2\n").unwrap();
    ok(d, &["mmd", "--x", "x.csv", "--y", "y.csv", "--out", "m.json"]);
    let m: Value = serde_json::from_str(&fs::read_to_string(d.join("m.json")).unwrap()).unwrap();
    assert_eq!(m["mmd"].as_f64(), Some(0.0));
}

#[test]
fn perturb_trace_has_one_row_per_edge() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_graph(d, "g", "2");
    ok(
        d,
        &[
            "perturb", "--bundle", "g", "--minority-targets", "--budget", "12", "--mode", "homo", "--seed", "5", "--out", "p",
            "--trace", "t.tsv", "--checkpoints", "0,6,12", "--sweep", "s.csv",
        ],
    );
    let trace = fs::read_to_string(d.join("t.tsv")).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("step\tu\tv"));
    assert_eq!(lines.count(), 12);
    let before = fs::read_to_string(d.join("g/edges.tsv")).unwrap().lines().count();
    let after = fs::read_to_string(d.join("p/edges.tsv")).unwrap().lines().count();
    assert_eq!(after, before + 12);
    let sweep = fs::read_to_string(d.join("s.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 4);
}

#[test]
fn missing_bundle_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = gsd(tmp.path(), &["homophily", "--bundle", "absent", "--out", "h.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent"));
    assert!(!tmp.path().join("h.csv").exists());
}

#[test]
fn stochastic_stage_requires_seed() {
    let tmp = tempfile::tempdir().unwrap();
    small_graph(tmp.path(), "g", "1");
    let out = gsd(tmp.path(), &["train", "--bundle", "g", "--out", "m.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn saturated_budget_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    small_graph(d, "g", "1");
    // Two targets can hold at most one edge between them.
    fs::write(d.join("t.json"), "[0, 1]").unwrap();
    let out = gsd(d, &["perturb", "--bundle", "g", "--targets", "t.json", "--budget", "2", "--mode", "homo", "--seed", "1", "--out", "p"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!d.join("p").exists());
}

#[test]
fn table_d2_has_the_grid_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let config = serde_json::json!({
        "num_nodes": 120,
        "dim": 10,
        "rho": 0.5,
        "homophilic": [[0.05, 0.01], [0.05, 0.02]],
        "heterophilic": [[0.01, 0.05]],
        "mixture_homophilic_share": 0.5,
        "seeds": [],
        "train": {
            "hops": 1, "hidden": [], "learning_rate": 0.1, "epochs": 50, "l2": 0.0001,
            "patience": 50, "seed": 0, "mode": "plain-mean", "max_halvings": 40
        }
    });
    fs::write(d.join("cfg.json"), config.to_string()).unwrap();
    let args = ["table-d2", "--seeds", "2", "--config", "cfg.json", "--out", "t.csv", "--long", "l.csv"];
    ok(d, &args);
    let first = fs::read(d.join("t.csv")).unwrap();
    ok(d, &args);
    assert_eq!(first, fs::read(d.join("t.csv")).unwrap());

    let text = String::from_utf8(first).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.len() == 4));
    assert_eq!(rows[1][0], "none");
    assert_eq!(rows[1][1], "-");
    assert!(rows[2][3].contains('±'));
    let long = fs::read_to_string(d.join("l.csv")).unwrap();
    assert_eq!(long.lines().count(), 1 + 5 * 2);
}

fn write_recipe(dir: &Path, seed: Option<u64>) {
    let mut recipe = serde_json::json!({
        "stages": [
            {"stage": "gen-csbm", "args": {"nodes": 200, "split": [0.48, 0.32], "out": "graph"}},
            {"stage": "train", "args": {"bundle": "graph", "hops": 2, "epochs": 60, "out": "model.json"}},
            {"stage": "eval", "args": {"bundle": "graph", "model": "model.json", "gamma": 0.1, "out": "eval.json"}},
            {"stage": "ood-split", "args": {"bundle": "graph", "out": "ood"}}
        ]
    });
    if let Some(s) = seed {
        recipe["seed"] = s.into();
    }
    fs::write(dir.join("recipe.json"), recipe.to_string()).unwrap();
}

#[test]
fn recipe_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write_recipe(d, Some(11));
    ok(d, &["--jobs", "2", "run", "--recipe", "recipe.json"]);
    let first = fs::read(d.join("manifest.json")).unwrap();
    let eval_first = fs::read(d.join("eval.json")).unwrap();
    ok(d, &["run", "--recipe", "recipe.json"]);
    assert_eq!(first, fs::read(d.join("manifest.json")).unwrap());
    assert_eq!(eval_first, fs::read(d.join("eval.json")).unwrap());

    let manifest: Value = serde_json::from_slice(&first).unwrap();
    assert_eq!(manifest["seed"].as_u64(), Some(11));
    let stages = manifest["stages"].as_array().unwrap();
    assert_eq!(stages.len(), 4);
    assert!(stages[0]["seed"].is_u64());
    assert!(stages[2]["seed"].is_null());
    for stage in stages {
        for output in stage["outputs"].as_array().unwrap() {
            let bytes = fs::read(d.join(output["path"].as_str().unwrap())).unwrap();
            assert_eq!(output["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
        }
    }
}

#[test]
fn recipe_seed_override_changes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write_recipe(d, Some(11));
    ok(d, &["run", "--recipe", "recipe.json"]);
    let edges = fs::read(d.join("graph/edges.tsv")).unwrap();
    ok(d, &["run", "--recipe", "recipe.json", "--seed", "12", "--manifest", "m2.json"]);
    assert_ne!(edges, fs::read(d.join("graph/edges.tsv")).unwrap());
    let m2: Value = serde_json::from_str(&fs::read_to_string(d.join("m2.json")).unwrap()).unwrap();
    assert_eq!(m2["seed"].as_u64(), Some(12));
}

#[test]
fn recipe_without_seed_names_the_stage() {
    let tmp = tempfile::tempdir().unwrap();
    write_recipe(tmp.path(), None);
    let out = gsd(tmp.path(), &["run", "--recipe", "recipe.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("0:gen-csbm"));
}

#[test]
fn recipe_with_missing_bundle_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let recipe = serde_json::json!({
        "seed": 1,
        "stages": [{"stage": "homophily", "args": {"bundle": "nowhere", "out": "h.csv"}}]
    });
    fs::write(tmp.path().join("r.json"), recipe.to_string()).unwrap();
    let out = gsd(tmp.path(), &["run", "--recipe", "r.json"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("0:homophily") && err.contains("nowhere"), "{err}");
    assert!(!tmp.path().join("manifest.json").exists());
}

#[test]
fn recipe_overrides_apply_per_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    write_recipe(d, Some(3));
    ok(d, &["run", "--recipe", "recipe.json", "--set", "gen-csbm.nodes=150"]);
    let labels = fs::read_to_string(d.join("graph/labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 150);
    let bad = gsd(d, &["run", "--recipe", "recipe.json", "--set", "nosuch.nodes=1"]);
    assert_eq!(bad.status.code(), Some(2));
}
