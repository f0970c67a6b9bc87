use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_renormforge"))
}

#[test]
fn brjuno_writes_reports_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["brjuno", "--set", "brjuno.m=40", "--set", "output.wall_clock=false", "--format", "json,csv", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json = std::fs::read_to_string(dir.path().join("brjuno.json")).unwrap();
    let rep: renormforge::RunReport = serde_json::from_str(&json).unwrap();
    let y = rep.table("brjuno").unwrap().column("y").unwrap();
    assert!((y.last().unwrap().unwrap() - 1.2598).abs() < 1e-4);
    let csv = std::fs::read_to_string(dir.path().join("brjuno_brjuno.csv")).unwrap();
    assert!(csv.starts_with("# columns:"));
}

#[test]
fn config_errors_exit_two() {
    let out = bin().args(["brjuno", "--set", "brjuno.m=0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("brjuno.m"));
    let out = bin().args(["brjuno", "--set", "nosuch.key=1"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["renorm3d"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["brjuno", "--config", "/nonexistent/file.toml"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["renorm2d", "--set", "tolerances.fixed_point=1e-30", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("[FAIL]"));
}

#[test]
fn golden_files_are_byte_stable() {
    let run = |dir: &std::path::Path| {
        let out = bin()
            .args(["commutator-sweep", "--set", "output.wall_clock=false", "--set", "run.seed=9", "--format", "json,csv", "--out"])
            .arg(dir)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let p = e.unwrap().path();
                (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
            })
            .collect();
        files.sort();
        files
    };
    // same directory, since the config echo records it
    let dir = tempfile::tempdir().unwrap();
    let first = run(dir.path());
    assert_eq!(first.len(), 3);
    assert_eq!(first, run(dir.path()));
}
