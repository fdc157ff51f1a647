use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bslab")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> usize {
    rows[0].iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
}

const COUNTEREXAMPLE: &str = r#"{"model":"euclid","family":{"kind":"counterexample"},
  "functions":[{"kind":"bspline","k":2,"a":[1,1]}],"n":{"from":1,"to":10},"radii":[1.5]}"#;

#[test]
fn counterexample_defect_increases() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "c.json", COUNTEREXAMPLE);
    let out = tmp.path().join("out");
    let o = bslab(&["euclid", "scan", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&out.join("report.csv"));
    let (n, d) = (column(&rows, "n"), column(&rows, "defect_f"));
    let defects: Vec<(u64, f64)> = rows[1..]
        .iter()
        .map(|r| (r[n].parse().unwrap(), r[d].parse::<f64>().unwrap()))
        .filter(|(n, _)| *n >= 3)
        .collect();
    assert_eq!(defects.len(), 8);
    assert!(defects.windows(2).all(|w| w[1].1 > w[0].1), "{defects:?}");
}

#[test]
fn free_group_relative_columns_vanish_above_radius() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.json",
        r#"{"model":"schreier","group":{"kind":"free","rank":2},"scheme":{"kind":"full_homology"},
            "limit":"kernel","n":{"from":1,"to":6},"radii":[1,2,3]}"#,
    );
    let out = tmp.path().join("out");
    let o = bslab(&["schreier", "scan", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let rows = csv_rows(&out.join("report.csv"));
    let (n, r, c, s) = (column(&rows, "n"), column(&rows, "r"), column(&rows, "count_sum"), column(&rows, "sign_sum"));
    let mut checked = 0;
    for row in &rows[1..] {
        if row[n].parse::<u64>().unwrap() > row[r].parse::<u64>().unwrap() {
            assert_eq!((row[c].as_str(), row[s].as_str()), ("0", "0"));
            checked += 1;
        }
    }
    assert_eq!(checked, 3 + 4 + 5);
}

#[test]
fn missing_seed_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "h.json", r#"{"model":"hyperbolic","n":[1,2],"samples":100,"radii":[0.5]}"#);
    let o = bslab(&["hyp", "bsprob", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
    assert!(!tmp.path().join("o").exists());
    // An override supplies it.
    let o = bslab(&["hyp", "bsprob", "--config", &cfg, "--seed-override", "3", "--out", tmp.path().join("o").to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn invalid_configs_exit_2() {
    let tmp = TempDir::new().unwrap();
    let unknown = write_config(tmp.path(), "u.json", r#"{"model":"euclid","family":{"kind":"counterexample"},"n":[1],"extra":1}"#);
    let o = bslab(&["euclid", "scan", "--config", &unknown]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("extra"));
    let wrong = write_config(tmp.path(), "w.json", COUNTEREXAMPLE);
    let o = bslab(&["zcover", "check", "--config", &wrong]);
    assert_eq!(o.status.code(), Some(2));
    let o = bslab(&["euclid", "scan", "--config", tmp.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = bslab(&["euclid", "frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_failures_are_recorded_per_row_and_exit_3() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "b.json",
        r#"{"model":"schreier","group":{"kind":"free","rank":2},"scheme":{"kind":"full_homology"},
            "n":[1,2,3,4],"radii":[1],"budgets":{"ball":1000,"index":10}}"#,
    );
    let out = tmp.path().join("out");
    let o = bslab(&["schreier", "scan", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let rows = csv_rows(&out.join("report.csv"));
    let (n, err) = (column(&rows, "n"), column(&rows, "error"));
    // Index n^2 exceeds 10 only for n = 4.
    let failed: Vec<&str> = rows[1..].iter().filter(|r| !r[err].is_empty()).map(|r| r[n].as_str()).collect();
    assert_eq!(failed, ["4"]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["failures"][0]["exit_code"], 3);
}

#[test]
fn reports_are_reproducible_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "h.json",
        r#"{"model":"hyperbolic","n":[1,2,3],"systole_fractions":[0.6],"samples":2000,"seed":9,"cutoff":10.5}"#,
    );
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = tmp.path().join(format!("out{threads}"));
        let o = bslab(&["--threads", threads, "hyp", "bsprob", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((fs::read(out.join("report.csv")).unwrap(), fs::read(out.join("report.json")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
    let json: serde_json::Value = serde_json::from_slice(&outputs[0].1).unwrap();
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(json["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn zcover_report_fields() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "z.json",
        r#"{"model":"zcover","basis":[[1,0],[0,1]],"chi":[0,1],"functions":[{"kind":"bspline","k":2,"a":[3,3]}],
            "n":[1,2,3],"theta":[0.5]}"#,
    );
    let out = tmp.path().join("out");
    let o = bslab(&["zcover", "check", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let d = &json["details"];
    assert_eq!(d["theta_grid"], serde_json::json!([0.5]));
    assert_eq!(d["degree"], serde_json::json!([2]));
    assert_eq!(d["thresholds"], serde_json::json!([2]));
    assert_eq!(d["defects"][0][0]["delta"], "6");
}

#[test]
fn acceptance_subset_runs() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("acc");
    let o = bslab(&["suite", "acceptance", "--only", "2,3,7", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 3);
    assert!(out.join("report.csv").exists());
}
