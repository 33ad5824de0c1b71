use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rgvroute"))
        .args(args)
        .env("RGV_OUT_DIR", dir)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn seq_and_milp_agree_on_toy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--kind", "toy", "-o", "toy.json"]);
    ok(d, &["solve", "toy.json", "--backend", "seq", "-o", "seq.json"]);
    ok(d, &["solve", "toy.json", "--backend", "milp", "--cuts", "g123", "-o", "milp.json"]);
    let (s, m) = (json(&d.join("seq.json")), json(&d.join("milp.json")));
    let (es, em) = (s["energy"].as_f64().unwrap(), m["energy"].as_f64().unwrap());
    assert!((es - em).abs() < 1e-6, "{es} vs {em}");
    assert_eq!(m["status"], "optimal");
    ok(d, &["validate", "--solution", "milp.json", "--instance", "toy.json"]);
}

#[test]
fn tampered_solution_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--kind", "static", "--seed", "4", "--n", "4", "-o", "i.json"]);
    ok(d, &["solve", "i.json", "-o", "s.json"]);
    let mut s = json(&d.join("s.json"));
    s["energy"] = serde_json::json!(s["energy"].as_f64().unwrap() - 1.0);
    std::fs::write(d.join("bad.json"), s.to_string()).unwrap();
    let out = run(d, &["validate", "--solution", "bad.json", "--instance", "i.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(d, &["solve", "missing.json"]).status.code(), Some(2));
    ok(d, &["gen", "--kind", "toy", "-o", "toy.json"]);
    let mut inst = json(&d.join("toy.json"));
    for r in inst["requests"].as_array_mut().unwrap() {
        r["l"] = serde_json::json!(1.0);
    }
    std::fs::write(d.join("late.json"), inst.to_string()).unwrap();
    assert_eq!(run(d, &["solve", "late.json"]).status.code(), Some(1));
    assert_eq!(run(d, &["solve", "late.json", "--backend", "milp"]).status.code(), Some(1));
}

#[test]
fn rgv_config_changes_energy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--kind", "toy", "-o", "toy.json"]);
    ok(d, &["solve", "toy.json", "-o", "a.json"]);
    std::fs::write(d.join("heavy.toml"), "w_rgv = 3.0\n").unwrap();
    ok(d, &["--rgv-config", "heavy.toml", "solve", "toy.json", "-o", "b.json"]);
    let (a, b) = (json(&d.join("a.json")), json(&d.join("b.json")));
    assert!(b["energy"].as_f64().unwrap() > a["energy"].as_f64().unwrap());
    std::fs::write(d.join("broken.toml"), "w_rgv = -1.0\n").unwrap();
    assert_eq!(run(d, &["--rgv-config", "broken.toml", "solve", "toy.json"]).status.code(), Some(2));
}

#[test]
fn export_lp_writes_model_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["gen", "--kind", "toy", "-o", "toy.json"]);
    ok(d, &["export-lp", "toy.json", "--cuts", "g23", "-o", "m.lp", "--stats", "stats.csv"]);
    let lp = std::fs::read_to_string(d.join("m.lp")).unwrap();
    assert!(lp.contains("Minimize") && lp.contains("Subject To") && lp.trim_end().ends_with("End"));
    let stats = std::fs::read_to_string(d.join("stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 2);
}

#[test]
fn simulate_writes_csv_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let stdout = ok(d, &["simulate", "--controller", "both", "--count", "1", "--n", "15", "--traces", "-o", "r.csv"]);
    assert!(stdout.contains("saving"));
    let mut rdr = csv::Reader::from_path(d.join("r.csv")).unwrap();
    assert_eq!(rdr.records().count(), 2);
    assert!(d.join("dyn-0-rolling.events.csv").exists());
    assert!(d.join("dyn-0-rule.trace.jsonl").exists());
    assert!(d.join("r.summary.csv").exists());
}

#[test]
fn bench_and_oracle_suite() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["bench", "--sizes", "4", "--caps", "2", "--count", "2", "--cuts", "none,g23", "-o", "b.csv"]);
    let mut rdr = csv::Reader::from_path(d.join("b.csv")).unwrap();
    let rows: Vec<_> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[4] == "optimal"));
    ok(d, &["validate", "--count", "15", "--max-n", "3"]);
}
