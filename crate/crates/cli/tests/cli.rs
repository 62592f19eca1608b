// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end runs of the `ptomo` binary. Set `PTOMO_BLESS=1` to rewrite the
//! golden files under `tests/golden/`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ptomo_cli::plan::{ExperimentPlan, Stage};
use ptomo_cli::report::REPORT_FILES;
use ptomo_cli::stages::{FidelityTable, KIND_CIRCUIT, KIND_FIDELITY_TABLE};
use ptomo_cli::store::ResultsStore;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn ptomo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptomo")).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = ptomo(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Twenty-unitary pool, every stage, reduced resampling.
fn small_plan(name: &str) -> ExperimentPlan {
    let mut plan = ExperimentPlan::default_plan(name, 11);
    plan.pool_size = 20;
    plan.basis_size = 18;
    plan.shots = Some(1600);
    plan.evaluate.bootstrap_resamples = 40;
    plan.memory.restarts = 3;
    plan.memory.bootstrap_resamples = 8;
    plan.memory.bootstrap_restarts = 1;
    plan.markov.bootstrap_resamples = 40;
    plan.control.basis_size = 16;
    plan.control.restarts = 3;
    plan.control.decoupling.horizon_ns = 2048.0;
    plan.control.synthesis.eta_points = 3;
    plan
}

fn write_plan(dir: &Path, plan: &ExperimentPlan) -> PathBuf {
    let path = dir.join(format!("{}.json", plan.name));
    fs::write(&path, plan.to_json()).unwrap();
    path
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn missing_plan_file_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nowhere.json");
    let out = ptomo(&["run-plan", "--plan", p(&missing), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.json"));
}

#[test]
fn malformed_plan_exits_2_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: Value = serde_json::from_str(&small_plan("bad").to_json()).unwrap();
    v["markov"]["bootstrap_resamples"] = Value::from("many");
    let path = dir.path().join("bad.json");
    fs::write(&path, v.to_string()).unwrap();
    let out = ptomo(&["evaluate", "--plan", p(&path), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("markov.bootstrap_resamples"));

    v["markov"]["bootstrap_resamples"] = Value::from(40);
    v["basis_size"] = Value::from(20);
    fs::write(&path, v.to_string()).unwrap();
    let out = ptomo(&["evaluate", "--plan", p(&path), "--out", p(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("basis_size"));
}

#[test]
fn report_before_evaluate_exits_2_naming_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), &small_plan("early"));
    let out_dir = dir.path().join("o");

    let out = ptomo(&["report", "--out", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("evaluate"));

    ok(&["run-plan", "--plan", p(&plan), "--out", p(&out_dir), "--stage", "characterize"]);
    let out = ptomo(&["report", "--out", p(&out_dir)]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("evaluate") && err.contains("report"), "{err}");
    assert!(!out_dir.join("report").exists());
}

#[test]
fn unknown_stage_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), &small_plan("stagey"));
    let out = ptomo(&["run-plan", "--plan", p(&plan), "--out", p(&dir.path().join("o")), "--stage", "tomograph"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tomograph"));
}

#[test]
fn generate_basis_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = ok(&["generate-basis", "--seed", "5", "--out", p(&dir.path().join("a"))]);
    let b = ok(&["generate-basis", "--seed", "5", "--out", p(&dir.path().join("b"))]);
    let c = ok(&["generate-basis", "--seed", "6", "--out", p(&dir.path().join("c"))]);
    let bytes_a = fs::read(dir.path().join("a/basis.json")).unwrap();
    assert_eq!(bytes_a, fs::read(dir.path().join("b/basis.json")).unwrap());
    let sha = |s: &str| s.split_whitespace().next().unwrap().to_string();
    assert_eq!(sha(&a), sha(&b));
    assert_ne!(sha(&a), sha(&c));
    assert_eq!(sha(&a), hex::encode(Sha256::digest(&bytes_a)));

    let v: Value = serde_json::from_slice(&bytes_a).unwrap();
    assert_eq!(v["unitaries"].as_array().unwrap().len(), 28);
    let mut order: Vec<u64> = v["overlap_order"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).collect();
    order.sort_unstable();
    assert_eq!(order, (0..28).collect::<Vec<u64>>());
}

#[test]
fn full_pool_characterisation_stores_one_record_per_circuit() {
    let dir = tempfile::tempdir().unwrap();
    let plan = ExperimentPlan::default_plan("full", 3);
    let path = write_plan(dir.path(), &plan);
    let out_dir = dir.path().join("o");
    ok(&["run-plan", "--plan", p(&path), "--out", p(&out_dir), "--stage", "characterize"]);
    let store = ResultsStore::open(&out_dir).unwrap();
    let circuits: Vec<_> = store.find("full", KIND_CIRCUIT).collect();
    assert_eq!(circuits.len(), 9408);
    for r in &circuits {
        assert_eq!(r.payload["shots"], Value::from(1600));
        let counts: u64 = r.payload["counts"].as_array().unwrap().iter().map(|c| c.as_u64().unwrap()).sum();
        assert_eq!(counts, 1600);
    }
}

#[test]
fn staged_run_matches_combined_run_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let plan = small_plan("staged");
    let path = write_plan(dir.path(), &plan);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    ok(&["run-plan", "--plan", p(&path), "--out", p(&a)]);
    ok(&["run-plan", "--plan", p(&path), "--out", p(&c)]);
    for cmd in ["evaluate", "memory-bound", "compare-markov", "optimize-decoupling", "synthesize-gate"] {
        ok(&[cmd, "--plan", p(&path), "--out", p(&b)]);
    }
    let store_a = read(&a.join("store.jsonl"));
    assert_eq!(store_a, read(&b.join("store.jsonl")));
    assert_eq!(store_a, read(&c.join("store.jsonl")));

    // a rerun finds every stage complete and appends nothing
    ok(&["run-plan", "--plan", p(&path), "--out", p(&a)]);
    assert_eq!(store_a, read(&a.join("store.jsonl")));

    ok(&["report", "--out", p(&a)]);
    ok(&["report", "--out", p(&b)]);
    for f in fs::read_dir(a.join("report")).unwrap() {
        let name = f.unwrap().file_name();
        assert_eq!(read(&a.join("report").join(&name)), read(&b.join("report").join(&name)), "{name:?}");
    }
}

#[test]
fn seed_override_changes_the_data() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_plan(dir.path(), &small_plan("seeded"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["run-plan", "--plan", p(&path), "--out", p(&a), "--stage", "characterize"]);
    ok(&["run-plan", "--plan", p(&path), "--out", p(&b), "--stage", "characterize", "--seed", "12"]);
    let first = |d: &Path| ResultsStore::open(d).unwrap().find("seeded", KIND_CIRCUIT).next().unwrap().payload.clone();
    assert_ne!(first(&a)["counts"], first(&b)["counts"]);
}

#[test]
fn a_different_plan_under_the_same_name_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = small_plan("clash");
    let path = write_plan(dir.path(), &plan);
    let out_dir = dir.path().join("o");
    ok(&["run-plan", "--plan", p(&path), "--out", p(&out_dir), "--stage", "characterize"]);
    plan.shots = Some(800);
    let path = write_plan(dir.path(), &plan);
    let out = ptomo(&["run-plan", "--plan", p(&path), "--out", p(&out_dir), "--stage", "characterize"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("different plan"));
}

/// Linearly interpolated quantile of sorted data.
fn quantile(s: &[f64], q: f64) -> f64 {
    let h = q * (s.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(s.len() - 1);
    s[lo] + (h - lo as f64) * (s[hi] - s[lo])
}

#[test]
fn noiseless_report_and_box_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let mut plan = ExperimentPlan::default_plan("exact", 4);
    plan.shots = None;
    plan.evaluate.basis_sizes = vec![10, 24];
    plan.evaluate.bootstrap_resamples = 20;
    plan.stages = vec![Stage::Evaluate, Stage::Memory];
    let path = write_plan(dir.path(), &plan);
    let out_dir = dir.path().join("o");
    ok(&["run-plan", "--plan", p(&path), "--out", p(&out_dir)]);
    ok(&["report", "--out", p(&out_dir), "--plan", p(&path)]);
    let report = out_dir.join("report");

    let summary = read(&report.join("summary.txt"));
    assert!(summary.contains("held-out fidelity at n=24: median 1.0000"), "{summary}");
    assert!(summary.contains("stages not run: markov, decouple, synthesize"), "{summary}");

    let memory = read(&report.join("memory_bounds.csv"));
    let placements: Vec<&str> = memory.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(placements, ["slot 1", "slot 2", "both"]);

    let store = ResultsStore::open(&out_dir).unwrap();
    let box_csv = read(&report.join("box_stats.csv"));
    for rec in store.find("exact", KIND_FIDELITY_TABLE) {
        let t: FidelityTable = rec.decode().unwrap();
        let mut s = t.fidelities.clone();
        s.sort_by(f64::total_cmp);
        let (q1, q3) = (quantile(&s, 0.25), quantile(&s, 0.75));
        let iqr = q3 - q1;
        let wl = *s.iter().find(|&&v| v >= q1 - 1.5 * iqr).unwrap();
        let wh = *s.iter().rev().find(|&&v| v <= q3 + 1.5 * iqr).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        let expected = format!(
            "{},{},{mean:.4},{:.4},{q1:.4},{q3:.4},{wl:.4},{wh:.4},{:.4},{:.4}",
            t.n,
            s.len(),
            quantile(&s, 0.5),
            s[0],
            s[s.len() - 1]
        );
        assert!(box_csv.lines().any(|l| l == expected), "missing {expected:?} in\n{box_csv}");
        assert_eq!(s.len(), (plan.pool_size - t.n).pow(2) * 4);
    }
}

fn check_golden(name: &str, actual: &str) {
    let path = golden_dir().join(name);
    if std::env::var_os("PTOMO_BLESS").is_some() {
        fs::write(&path, actual).unwrap();
        return;
    }
    let expected = read(&path);
    assert!(expected == actual, "{name} differs from the golden copy; rerun with PTOMO_BLESS=1 if intended\n--- expected\n{expected}\n--- actual\n{actual}");
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

#[test]
fn small_plan_matches_golden_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let path = golden_dir().join("plan.json");
    if std::env::var_os("PTOMO_BLESS").is_some() {
        fs::write(&path, small_plan("golden").to_json() + "\n").unwrap();
    }
    let out_dir = dir.path().join("o");
    ok(&["run-plan", "--plan", p(&path), "--out", p(&out_dir)]);
    ok(&["report", "--out", p(&out_dir)]);
    for name in REPORT_FILES {
        check_golden(name, &read(&out_dir.join("report").join(name)));
    }
    let head: String = read(&out_dir.join("store.jsonl")).lines().take(4).map(|l| format!("{l}\n")).collect();
    check_golden("store_head.jsonl", &head);
}

#[test]
fn shipped_plans_are_valid() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("plans");
    let mut names = Vec::new();
    for entry in fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let plan = ExperimentPlan::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(path.file_stem().unwrap().to_str(), Some(plan.name.as_str()));
        names.push(plan.name);
    }
    names.sort();
    assert_eq!(names, ["default", "markovian", "noiseless", "swap"]);
}
