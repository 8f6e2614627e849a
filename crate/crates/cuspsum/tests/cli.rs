use std::path::Path;
use std::process::{Command, Output};

use cuspsum::cache;

fn cuspsum(args: &[&str]) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cuspsum"));
    c.args(args).env_remove("CUSPSUM_CACHE_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    cuspsum(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header comment, column names, then rows as name→cell maps.
fn parse_csv(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    let names: Vec<String> = lines.next().unwrap().split(',').map(str::to_string).collect();
    lines.map(|l| names.iter().cloned().zip(l.split(',').map(str::to_string)).collect()).collect()
}

#[test]
fn tau_dump_and_idempotent_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.tauc");
    let p = path.to_str().unwrap();

    let first = run(&["tau", "10", "--cache", p, "--dump"]);
    assert_eq!(code(&first), 0, "{first:?}");
    let out = stdout(&first);
    assert!(out.lines().next().unwrap().contains("10 coefficients"));
    assert!(out.contains("(built)"));
    assert!(out.lines().any(|l| l == "2 -24"));
    assert!(out.lines().any(|l| l == "3 252"));
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 16 + 160);
    let bytes = std::fs::read(&path).unwrap();

    let second = run(&["tau", "10", "--cache", p]);
    assert_eq!(code(&second), 0);
    let summary = stdout(&second);
    assert!(summary.contains("(reused)"));
    assert_eq!(summary.replace("reused", "built"), out.lines().next().unwrap().to_string() + "\n");
    assert_eq!(std::fs::read(&path).unwrap(), bytes);
    assert!(summary.contains(&cache::checksum(&cache::read(&path).unwrap())));
}

#[test]
fn tau_default_location_comes_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = cuspsum(&["tau", "5"]).env("CUSPSUM_CACHE_DIR", dir.path()).output().unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(cache::read(&dir.path().join(cache::FILE_NAME)).unwrap(), vec![1, -24, 252, -1472, 4830]);
    assert_eq!(code(&run(&["tau", "5"])), 1);
}

#[test]
fn tau_corrupted_magic_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.tauc");
    let mut bytes = cache::encode(&[1, -24]);
    bytes[..4].copy_from_slice(b"JUNK");
    std::fs::write(&path, bytes).unwrap();
    let o = run(&["tau", "2", "--cache", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("magic"));
}

#[test]
fn mean_square_example_record() {
    let o = run(&["mean-square", "--M", "10000", "--delta-exp", "0.6", "--k", "1", "--h", "1"]);
    assert_eq!(code(&o), 0, "{o:?}");
    let rows = parse_csv(&stdout(&o));
    assert_eq!(rows.len(), 1);
    let r = &rows[0];
    for f in ["lhs", "S", "budget_off_diagonal", "budget_window", "budget_cross", "budget_total", "table_sha256"] {
        assert!(!r[f].is_empty(), "{f} empty");
    }
    let lhs: f64 = r["lhs"].parse().unwrap();
    let s: f64 = r["S"].parse().unwrap();
    let budget: f64 = r["budget_total"].parse().unwrap();
    assert!(lhs > 0.0 && s > 0.0 && (lhs - s).abs() <= budget);
    assert_eq!(r["M"], "1.0000000000000000e4");
    assert_eq!(r["k"], "1");
    assert_eq!(r["kind"], "run");
}

#[test]
fn mean_square_usage_errors() {
    let base = ["mean-square", "--M", "1000", "--delta-exp", "0.6"];
    let with = |extra: &[&str]| run(&[&base[..], extra].concat());
    assert_eq!(code(&with(&["--k", "2", "--h", "4"])), 1);
    assert_eq!(code(&run(&["mean-square", "--M", "1000", "--delta-exp", "0.5", "--k", "1", "--h", "1"])), 1);
    assert_eq!(code(&run(&["mean-square", "--M", "1000", "--delta-exp", "1", "--k", "1", "--h", "1"])), 1);
    assert_eq!(code(&with(&["--k", "1"])), 1);
    assert_eq!(code(&with(&["--k", "1", "--h", "1", "--format", "xml"])), 1);
    assert_eq!(code(&with(&["--k", "1", "--h", "1", "--jobs", "0"])), 1);
}

#[test]
fn resource_limit_exits_4() {
    let o = run(&["mean-square", "--M", "1e7", "--delta-exp", "0.6", "--k", "1", "--h", "1"]);
    assert_eq!(code(&o), 4, "{o:?}");
}

#[test]
fn json_matches_csv_fields() {
    let args = ["mean-square", "--M", "2000", "--delta-exp", "0.7", "--k", "3", "--h", "2"];
    let csv = parse_csv(&stdout(&run(&args))).remove(0);
    let o = run(&[&args[..], &["--format", "json", "--timing"]].concat());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let json: serde_json::Value = serde_json::from_str(&text).unwrap();
    for (name, cell) in &csv {
        let v = &json[name.as_str()];
        match v {
            serde_json::Value::Null => assert!(cell.is_empty(), "{name}"),
            serde_json::Value::String(s) => assert_eq!(s, cell, "{name}"),
            other => assert_eq!(other.as_f64().unwrap(), cell.parse::<f64>().unwrap(), "{name}"),
        }
    }
    assert_eq!(json["schema_version"], 1);
    assert!(json["runtime_seconds"].as_f64().unwrap() >= 0.0);
    assert!(!csv.contains_key("runtime_seconds"));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"M": 1500, "delta-exp": 0.7, "k": 2, "h": 1, "eps": 0.1}"#).unwrap();
    let c = cfg.to_str().unwrap();

    let from_file = parse_csv(&stdout(&run(&["mean-square", "--config", c]))).remove(0);
    assert_eq!(from_file["M"], "1.5000000000000000e3");
    assert_eq!(from_file["k"], "2");
    assert_eq!(from_file["eps"], "1.0000000000000001e-1");
    assert_eq!(from_file["ramp"], "2.5000000000000000e-1");

    let flagged = parse_csv(&stdout(&run(&["mean-square", "--config", c, "--k", "3", "--h", "2"]))).remove(0);
    assert_eq!(flagged["k"], "3");
    assert_eq!(flagged["h"], "2");
    assert_eq!(flagged["M"], "1.5000000000000000e3");

    std::fs::write(&cfg, r#"{"M": 1500, "bogus": 1}"#).unwrap();
    assert_eq!(code(&run(&["mean-square", "--config", c])), 1);
}

#[test]
fn cache_dir_is_used_and_checksummed() {
    let dir = tempfile::tempdir().unwrap();
    let o = cuspsum(&["mean-square", "--M", "1000", "--delta-exp", "0.6", "--k", "1", "--h", "1"])
        .env("CUSPSUM_CACHE_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let r = parse_csv(&stdout(&o)).remove(0);
    let n: usize = r["table_n_max"].parse().unwrap();
    let tau = cache::read(&dir.path().join(cache::FILE_NAME)).unwrap();
    assert_eq!(tau.len(), n);
    assert_eq!(r["table_sha256"], cache::checksum(&tau));
}

fn sweep_args<'a>(extra: &[&'a str]) -> Vec<&'a str> {
    let base = ["sweep", "--M-start", "500", "--M-factor", "2", "--M-count", "3", "--k", "2,1", "--delta-exp", "0.6"];
    [&base[..], extra].concat()
}

#[test]
fn sweep_rows_sorted_with_slopes() {
    let o = run(&sweep_args(&["--jobs", "2"]));
    assert_eq!(code(&o), 0, "{o:?}");
    let rows = parse_csv(&stdout(&o));
    let runs: Vec<(f64, u64)> = rows
        .iter()
        .filter(|r| r["kind"] == "run")
        .map(|r| (r["M"].parse().unwrap(), r["k"].parse().unwrap()))
        .collect();
    assert_eq!(runs, vec![(500.0, 1), (500.0, 2), (1000.0, 1), (1000.0, 2), (2000.0, 1), (2000.0, 2)]);
    let first_slope = rows.iter().position(|r| r["kind"] == "slope").unwrap();
    assert_eq!(first_slope, 6);
    assert!(rows[6..].iter().all(|r| r["kind"] == "slope" && r["points"] == "3"));
    assert!(rows.iter().any(|r| r["quantity"] == "lhs_over_delta_root_M" && r["k"] == "1"));

    let again = run(&sweep_args(&["--jobs", "1"]));
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn sweep_errors() {
    let o = run(&["sweep", "--M-start", "500", "--M-factor", "2", "--M-count", "2", "--k", "--delta-exp", "0.6"]);
    assert_eq!(code(&o), 1);
    let o = run(&sweep_args(&["--n-max", "1200"]));
    assert_eq!(code(&o), 3, "{o:?}");
    let rows = parse_csv(&stdout(&o));
    let errors = rows.iter().filter(|r| r.get("error").is_some_and(|e| !e.is_empty())).count();
    assert!(errors >= 2, "{rows:?}");
    assert!(rows.iter().any(|r| r["kind"] == "run" && r["error"].is_empty()));
}

#[test]
fn verify_suites() {
    let o = run(&["verify", "--suite", "identity"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("PASS identity/diagonal-identity"));

    let o = run(&["verify", "--suite", "voronoi", "--M", "10000", "--k", "3"]);
    assert_eq!(code(&o), 0, "{o:?}");
    assert!(stdout(&o).contains("PASS voronoi/residual M=10000 k=3"));

    let o = run(&["verify", "--suite", "tau", "--n-max", "3000"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 5);

    assert_eq!(code(&run(&["verify", "--suite", "nonsense"])), 1);
    assert_eq!(code(&run(&["verify"])), 1);
}

#[test]
fn help_and_version_succeed() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["--version"])), 0);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert!(Path::new(env!("CARGO_BIN_EXE_cuspsum")).exists());
}
