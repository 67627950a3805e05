use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bubblelab"))
}

fn figures() -> String {
    format!("{}/scenarios/figures.ini", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn run_writes_files_and_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", &figures(), "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("fig1_low.csv").exists());
    assert!(dir.path().join("fig2_sweep.csv").exists());
    assert!(dir.path().join("fig3_high_summary.txt").exists());
}

#[test]
fn sweep_runs_only_sweeps() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["sweep", &figures(), "--exec", "sequential", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("fig2_sweep.csv")]);
}

#[test]
fn horizon_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", &figures(), "--horizon", "7", "--out-dir"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("fig1_low.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ini");
    std::fs::write(&bad, "[x]\nmodel = barebones\npi = 0.1\nbeta = 0.95\ndelta = 1.5\nD = 1\nA = 0.4\n").unwrap();
    let out = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("delta") && err.contains("line 5"), "{err}");

    // A below the lower threshold: valid input, but the model cannot run it
    let low = dir.path().join("low.ini");
    std::fs::write(&low, "[x]\nmodel = barebones\npi = 0.1\nbeta = 0.95\ndelta = 0.08\nD = 1\nA = 0.1\nw0 = 30\n").unwrap();
    let out = bin().arg("run").arg(&low).arg("--out-dir").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin().arg("validate").arg(figures()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 5);

    let out = bin().arg("list-models").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("barebones_timevarying"));
}
