use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mhdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mhdl")).args(args).output().unwrap()
}

fn write(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("run.cfg");
    std::fs::write(&p, text).unwrap();
    p
}

const SMALL: &str = "n1 = 8\nn2 = 8\nn3 = 8\ndt = 0.01\nt_final = 0.02\n";

#[test]
fn trivial_run_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), &format!("{SMALL}preset = trivial\n"));
    let out = mhdl(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("completed 2 steps"));
}

#[test]
fn config_errors_exit_one_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "n1 = 8\nwhatever = 3\n");
    let out = mhdl(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2, column 1"));

    let missing = dir.path().join("absent.cfg");
    assert_eq!(mhdl(&["run", missing.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_one_not_two() {
    assert_eq!(mhdl(&["study", "vortex-sweep", "x.cfg"]).status.code(), Some(1));
    assert_eq!(mhdl(&["launch"]).status.code(), Some(1));
    assert_eq!(mhdl(&[]).status.code(), Some(1));
    assert_eq!(mhdl(&["--help"]).status.code(), Some(0));
}

#[test]
fn taylor_violation_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), &format!("{SMALL}preset = taylor-violating\namp = 0.1\n"));
    let out = mhdl(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("aborted at t = 0"));
}

#[test]
fn lemma_harness_writes_its_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("lemmas.csv");
    let cfg = write(dir.path(), &format!("n1 = 16\nn2 = 16\nn3 = 8\nlemma = test3\nsamples = 10\nreport = {}\n", report.display()));
    assert_eq!(mhdl(&["lemma-harness", cfg.to_str().unwrap()]).status.code(), Some(0));
    let text = std::fs::read_to_string(report).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "lemma,samples,ratio");
    assert!(lines[1].starts_with("test3,10,"));
}

#[test]
fn study_prints_csv_without_a_report_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), &format!("{SMALL}preset = demo\nlevels = 2\n"));
    let out = mhdl(&["study", "dt-convergence", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("dt,eta_diff,eta_order,"));
    assert_eq!(text.lines().count(), 3);
}
