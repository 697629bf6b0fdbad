use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bestarm::harness::{read_csv, CSV_COLUMNS};

fn bestarm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bestarm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_writes_csv_and_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "fb.json",
        r#"{"algorithm":"find-best","instance":[0.7,0.5,0.5],"params":{"rounds":500},"trials":20,"seed":4}"#,
    );
    let out = dir.path().join("fb.csv");
    let res = bestarm(&[
        "run",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--parallelism",
        "2",
    ]);
    assert_eq!(
        res.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&res.stderr)
    );
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_COLUMNS.join(","));
    let records = read_csv(text.as_bytes()).unwrap();
    assert_eq!(records.len(), 20);
    assert!(String::from_utf8_lossy(&res.stdout).contains("PASS"));
}

#[test]
fn seed_override_changes_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "pb.json",
        r#"{"algorithm":"rbar-sample","instance":{"family":"H","n":6,"eps":0.1},"params":{"m":2,"r":0.2},"trials":30,"seed":1}"#,
    );
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    bestarm(&["run", "--config", &cfg, "--out", a.to_str().unwrap()]);
    bestarm(&[
        "run",
        "--config",
        &cfg,
        "--out",
        b.to_str().unwrap(),
        "--seed",
        "2",
    ]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn failing_gate_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    // a single trial cannot push the Wilson upper bound below delta
    let cfg = write(
        dir.path(),
        "me.json",
        r#"{"algorithm":"median-elimination","instance":[0.6,0.5],"params":{"eps":0.1,"delta":0.1},"trials":1}"#,
    );
    let res = bestarm(&["run", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stdout).contains("FAIL"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown_key = write(
        dir.path(),
        "bad.json",
        r#"{"algorithm":"osmd","instance":[0.5,0.4],"params":{"rounds":10},"trials":1,"colour":"red"}"#,
    );
    let unused_param = write(
        dir.path(),
        "bad2.json",
        r#"{"algorithm":"osmd","instance":[0.5,0.4],"params":{"rounds":10,"delta":0.1},"trials":1}"#,
    );
    let missing = dir.path().join("missing.json");
    for cfg in [
        unknown_key.as_str(),
        unused_param.as_str(),
        missing.to_str().unwrap(),
    ] {
        let res = bestarm(&["run", "--config", cfg]);
        assert_eq!(res.status.code(), Some(2), "{cfg}");
    }
}

#[test]
fn unwritable_output_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "ok.json",
        r#"{"algorithm":"osmd","instance":[0.5,0.4],"params":{"rounds":10},"trials":2}"#,
    );
    let out = dir.path().join("no/such/dir/out.csv");
    let res = bestarm(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn verify_kl_passes() {
    let res = bestarm(&["verify", "kl"]);
    assert_eq!(res.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.lines().count() >= 9);
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn audit_reports_both_sides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "audit.json",
        r#"{"mu":{"family":"H","n":4,"eps":0.1},"mu_prime":{"family":"H","n":4,"eps":0.1,"j":2},
            "pulls_per_arm":100,"event":{"kind":"mean-exceeds","arm":2,"other":0},"trials":2000,"seed":3}"#,
    );
    let res = bestarm(&["audit-lb", "--config", &cfg]);
    assert_eq!(res.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("lhs  8.717669"), "{stdout}");
    assert!(stdout.contains("PASS"));
}
