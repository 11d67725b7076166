//! Exit-code and output-location contract of the binary.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_calderon-lab"))
}

#[test]
fn degenerate_lattice_is_a_config_error() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["linrecon", "--K", "0"])
        .arg("--set")
        .arg(format!("out_dir={}", out.path().display()))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_route_is_a_config_error() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["linrecon", "--route", "sideways"])
        .arg("--set")
        .arg(format!("out_dir={}", out.path().display()))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn unknown_config_key_is_rejected() {
    let status = bin()
        .args(["verify-algebra", "--set", "gird_n=48"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn starved_solver_exits_with_the_solver_code() {
    let out = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["linrecon", "--route", "dtn", "--K", "1"])
        .args(["--set", "grid_n=16", "--set", "cg_maxiter=2"])
        .arg("--set")
        .arg(format!("out_dir={}", out.path().display()))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn config_file_and_env_output_dir_are_honored() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("lab.toml");
    std::fs::write(&cfg_path, "grid_n = 24\nseed = 3\n").unwrap();
    let out = dir.path().join("reports");
    let status = bin()
        .arg("verify-algebra")
        .arg("--config")
        .arg(&cfg_path)
        .env("CALDERON_LAB_OUT", &out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    // header plus at least six property rows
    assert!(report.lines().count() >= 7, "short report:\n{report}");
}
