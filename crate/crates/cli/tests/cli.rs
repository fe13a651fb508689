use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gaussdist::table::COLUMNS;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gaussdist"))
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

const VACUUM: &str = r#"{"modes":1,"mean":[0,0],"cov":[[0.5,0],[0,0.5]]}"#;
const THERMAL: &str = r#"{"modes":1,"mean":[0,0],"cov":[[1,0],[0,1]]}"#;

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, COLUMNS);
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

fn col(name: &str) -> usize {
    COLUMNS.iter().position(|c| *c == name).unwrap()
}

fn num(row: &[String], name: &str) -> f64 {
    row[col(name)].parse().unwrap()
}

#[test]
fn compute_worked_example_json() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", VACUUM);
    let b = write(dir.path(), "b.json", THERMAL);
    let out = run(bin().args(["compute"]).arg(&a).arg(&b).arg("--json"));
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["convention_selected"], "quarter");
    let r = &v["reports"][0];
    assert!((r["overlap"]["value"].as_f64().unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-12);
    assert_eq!(r["e2"].as_f64(), Some(4.0));
    assert!(r["e1"].is_null());
    assert!((r["lami_t2"].as_f64().unwrap() - (2.0 + 2.0 * 3f64.sqrt())).abs() < 1e-12);
    assert_eq!(r["winner"], "basic_upper");
}

#[test]
fn compute_csv_with_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", VACUUM);
    let b = write(dir.path(), "b.json", THERMAL);
    let out = run(bin().arg("compute").arg(&a).arg(&b).args(["--csv", "--oracle", "40"]));
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 1);
    assert!((num(&rows[0], "oracle_distance") - 2.0 / 3.0).abs() < 1e-6);
    assert_eq!(rows[0][col("e1")], "");
}

#[test]
fn invalid_state_exits_2_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", VACUUM);
    let b = write(dir.path(), "b.json", r#"{"modes":1,"mean":[0,0],"cov":[[0.3,0],[0,0.3]]}"#);
    let out = run(bin().arg("compute").arg(&a).arg(&b));
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("uncertainty relation"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn malformed_and_mismatched_inputs_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let a = write(dir.path(), "a.json", VACUUM);
    let two = write(
        dir.path(),
        "two.json",
        r#"{"modes":2,"mean":[0,0,0,0],"cov":[[0.5,0,0,0],[0,0.5,0,0],[0,0,0.5,0],[0,0,0,0.5]]}"#,
    );
    let junk = write(dir.path(), "junk.json", "{not json");
    assert_eq!(run(bin().arg("compute").arg(&a).arg(&two)).status.code(), Some(2));
    assert_eq!(run(bin().arg("compute").arg(&a).arg(&junk)).status.code(), Some(2));
    assert_eq!(run(bin().arg("compute").arg(&a).arg(dir.path().join("missing.json"))).status.code(), Some(2));
}

#[test]
fn gauge_sweep_rows() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(dir.path(), "grid.json", r#"{"state1": {"a": [0.5, 1, 2]}, "state2": {"a": [0.5, 1, 2]}}"#);
    let out_path = dir.path().join("results.csv");
    let out = run(bin().args(["sweep", "--no-oracle", "--grid"]).arg(&grid).arg("--out").arg(&out_path));
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&std::fs::read_to_string(&out_path).unwrap());
    assert_eq!(rows.len(), 9);
    let row = rows.iter().find(|r| num(r, "a") == 0.5 && num(r, "b") == 1.0).unwrap();
    assert_eq!(num(row, "e2"), 4.0);
    assert!((num(row, "lami_t2") - 5.46410).abs() < 1e-5);
    assert_eq!(row[col("winner")], "basic_upper");
    assert!(rows.iter().all(|r| r[col("oracle_distance")].is_empty()));
}

#[test]
fn coherent_sweep_e1_is_four_times_distance() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(dir.path(), "grid.json", r#"{"state2": {"displacement": [0.5, 1, 2]}}"#);
    let out = run(bin().args(["sweep", "--no-oracle", "--grid"]).arg(&grid));
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows.len(), 3);
    for row in &rows {
        assert!((num(row, "e1") - 4.0 * num(row, "mean_dist")).abs() < 1e-12);
    }
}

#[test]
fn empty_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let grid = write(dir.path(), "grid.json", r#"{"state1": {"a": []}}"#);
    let out = run(bin().args(["sweep", "--grid"]).arg(&grid));
    assert_eq!(out.status.code(), Some(2));
    let unknown = write(dir.path(), "bad.json", r#"{"state1": {"temperature": [1]}}"#);
    assert_eq!(run(bin().args(["sweep", "--grid"]).arg(&unknown)).status.code(), Some(2));
}

#[test]
fn verify_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for name in ["one.csv", "two.csv"] {
        let path = dir.path().join(name);
        let out = run(bin()
            .args(["verify", "--trials", "4", "--modes", "1", "--class", "gauge", "--seed", "11", "--cutoff", "40", "--out"])
            .arg(&path));
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(summary["violations"], 0);
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let rows = csv_rows(&String::from_utf8(outputs.remove(0)).unwrap());
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| !r[col("oracle_distance")].is_empty()));
}

#[test]
fn verify_rejects_bad_arguments() {
    let three = run(bin().args(["verify", "--trials", "2", "--modes", "3", "--class", "pure"]));
    assert_eq!(three.status.code(), Some(2));
    let class = run(bin().args(["verify", "--trials", "2", "--modes", "1", "--class", "mixed"]));
    assert_eq!(class.status.code(), Some(2));
    let zero = run(bin().args(["verify", "--trials", "0", "--modes", "1", "--class", "pure"]));
    assert_eq!(zero.status.code(), Some(2));
}

#[test]
fn cache_dir_is_populated() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    std::fs::create_dir(&cache).unwrap();
    let a = write(dir.path(), "a.json", VACUUM);
    let b = write(dir.path(), "b.json", THERMAL);
    let first = run(bin().env("GAUSSDIST_CACHE_DIR", &cache).arg("compute").arg(&a).arg(&b).args(["--oracle", "20"]));
    assert_eq!(first.status.code(), Some(0));
    let files = std::fs::read_dir(&cache).unwrap().count();
    assert_eq!(files, 2);
    let second = run(bin().env("GAUSSDIST_CACHE_DIR", &cache).arg("compute").arg(&a).arg(&b).args(["--oracle", "20"]));
    assert_eq!(first.stdout, second.stdout);
}
