use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectral-sens"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn binary")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("json output")
}

#[test]
fn eig_json_reports_kato_crossing() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["eig", "--builtin", "kato", "--m", "1,2", "--d", "0.6,0.8"],
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let reports = v["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    assert!((reports[0]["derivative"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((reports[1]["derivative"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert_eq!(reports[0]["cluster"]["r"], 2);
}

#[test]
fn global_flags_may_precede_the_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "--builtin",
            "kato",
            "--x0",
            "3,4",
            "eig",
            "--m",
            "1",
            "--d",
            "1,0",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!((json(&out)["reports"][0]["derivative"].as_f64().unwrap() - 0.6).abs() < 1e-12);
}

#[test]
fn csv_uses_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &[
            "eig",
            "--builtin",
            "kato",
            "--x0",
            "3,4",
            "--m",
            "1",
            "--d",
            "1,0",
            "--format",
            "csv",
        ],
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("m,direction_index,d1,d2,derivative,selected_index,cluster_size,guard")
    );
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[2], "1.0000000000000000e0");
    assert_eq!(row[4], "5.9999999999999998e-1");
}

#[test]
fn sv_reports_both_paths() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("f.json"),
        r#"{"base":{"rows":1,"cols":1,"entries":[[0,0]]},"coefficients":[{"rows":1,"cols":1,"entries":[[1,0]]}]}"#,
    )
    .unwrap();
    let out = run(
        dir.path(),
        &["sv", "--family", "f.json", "--x0", "-2", "--k", "1", "--d", "1"],
    );
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let item = &v["reports"][0];
    assert_eq!(item["embedding"]["path"], "embedding");
    assert_eq!(item["reduced"]["path"], "reduced");
    assert!((item["derivative"].as_f64().unwrap() + 1.0).abs() < 1e-12);
    assert!(item["path_delta"].as_f64().unwrap() < 1e-12);
}

#[test]
fn scan_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let a = run(
        dir.path(),
        &["scan", "--builtin", "kato", "--n-directions", "6", "--seed", "1"],
    );
    let b = run(
        dir.path(),
        &["scan", "--builtin", "kato", "--n-directions", "6", "--seed", "2"],
    );
    assert_eq!(a.status.code(), Some(0));
    assert_ne!(a.stdout, b.stdout);
    assert_eq!(json(&a)["rows"].as_array().unwrap().len(), 12);
}

#[test]
fn verify_summarizes() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["verify", "--builtin", "kato", "--x0", "0,0"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["summary"]["pass"], true);
    assert_eq!(v["summary"]["failed"], 0);
}

#[test]
fn verify_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // finite differences never match to zero tolerance
    let out = run(
        dir.path(),
        &["verify", "--builtin", "kato", "--x0", "3,4", "--verify-tol", "0"],
    );
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["summary"]["pass"], false);
    assert!(v["summary"]["failed"].as_u64().unwrap() > 0);
}

#[test]
fn out_file_replaces_target() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    std::fs::write(&target, "stale").unwrap();
    let out = run(dir.path(), &["selftest", "--out", "report.json"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: serde_json::Value = serde_json::from_slice(&std::fs::read(&target).unwrap()).unwrap();
    assert_eq!(written["pass"], true);
    let leftovers = std::fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(leftovers, 1);
}

#[test]
fn failed_command_leaves_no_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        dir.path(),
        &["eig", "--builtin", "kato", "--d", "2,0", "--out", "x.json"],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(!dir.path().join("x.json").exists());
    assert!(String::from_utf8_lossy(&out.stderr).contains("non_unit_direction"));
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(dir.path(), &["--help"]).status.code(), Some(0));
}
