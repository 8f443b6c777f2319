use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn thpnoma(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_thpnoma")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("cfg.json");
    std::fs::write(&p, json).unwrap();
    p.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{"n_tx": 4, "n_clusters": 2, "pop_per_set": 6, "snr_db": [10, 15], "eta_grid": [0.2, 0.8]}"#;

#[test]
fn rate_sweep_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let o = thpnoma(&["rate-sweep", "--config", &cfg, "--seed", "42", "--trials", "1", "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs[0].clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# thpnoma-rates v1");
    assert!(lines[1].starts_with("method,axis,sweep_value,trial,seed"));
    // 3 methods x 2 SNR points x 1 trial.
    assert_eq!(lines.len(), 2 + 6);
    assert!(lines[2..].iter().all(|l| l.contains(",42,")));
}

#[test]
fn eta_sweep_rows_to_stdout() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let o = thpnoma(&["eta-sweep", "--config", &cfg, "--trials", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    // 2 eta values x 2 methods x 2 trials.
    assert_eq!(text.lines().count(), 2 + 8);
    assert!(text.lines().skip(2).all(|l| l.starts_with("thp-joint,eta,") || l.starts_with("zf-baseline,eta,")));
}

#[test]
fn symbol_check_reports_no_strong_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_clusters": 3, "symbol": {"frames": 500}}"#);
    let o = thpnoma(&["symbol-check", "--config", &cfg, "--trials", "2", "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# thpnoma-symbols v1"));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|&h| h == "strong_errors").unwrap();
    let status = header.iter().position(|&h| h == "status").unwrap();
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in rows {
        assert_eq!(r[status], "ok");
        assert_eq!(r[col], "0");
    }
}

#[test]
fn harness_errors_exit_nonzero() {
    let dir = TempDir::new().unwrap();
    let bad = write_config(dir.path(), r#"{"eta": 1.5}"#);
    assert!(!thpnoma(&["rate-sweep", "--config", &bad]).status.success());
    assert!(!thpnoma(&["rate-sweep", "--config", "/nonexistent/cfg.json"]).status.success());
    assert!(!thpnoma(&["eta-sweep", "--trials", "0"]).status.success());
    let malformed = write_config(dir.path(), "{ not json");
    assert!(!thpnoma(&["symbol-check", "--config", &malformed]).status.success());
}

#[test]
fn per_trial_failures_are_rows_not_crashes() {
    // eta = 1 leaves the weak users no power, so slack initialization fails
    // on every trial.
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_tx": 2, "n_clusters": 2, "eta": 1.0, "snr_db": [15]}"#);
    let o = thpnoma(&["rate-sweep", "--config", &cfg, "--trials", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 2 + 6);
    assert!(text.lines().skip(2).all(|l| l.contains(",error: ")));
}
