//! End-to-end runs of the `logres` binary: exit codes, output formats and input sources.

use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("../core/fixtures/{name}.problem"))
}

fn logres(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_logres"))
        .args(args)
        .output()
        .unwrap()
}

fn run_fixture(name: &str, extra: &[&str]) -> Output {
    let path = fixture(name);
    let mut args = vec![path.to_str().unwrap()];
    args.extend_from_slice(extra);
    logres(&args)
}

fn with_stdin(input: &str, args: &[&str]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_logres"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

#[test]
fn resolved_problem_exits_zero_with_json_trace() {
    let out = run_fixture("cusp", &[]);
    assert_eq!(out.status.code(), Some(0));
    let trace: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(trace["centers"], 8);
    assert!(trace["charts"].as_array().is_some_and(|c| !c.is_empty()));
}

#[test]
fn failure_over_the_base_exits_two() {
    assert_eq!(run_fixture("stuck_plane_pre", &[]).status.code(), Some(2));
    assert_eq!(run_fixture("stuck_plane_post", &[]).status.code(), Some(0));
}

#[test]
fn depth_cap_exits_four() {
    assert_eq!(
        run_fixture("cusp", &["--max-depth", "1"]).status.code(),
        Some(4)
    );
}

#[test]
fn parse_errors_exit_three() {
    let out = with_stdin("rank 2\nideal u(1,)\n", &["-"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
    assert_eq!(logres(&["/nonexistent/x.problem"]).status.code(), Some(3));
}

#[test]
fn stdin_matches_file_input() {
    let src = std::fs::read_to_string(fixture("node")).unwrap();
    let piped = with_stdin(&src, &["-"]);
    let direct = run_fixture("node", &[]);
    assert_eq!(piped.status.code(), Some(0));
    assert_eq!(piped.stdout, direct.stdout);
}

#[test]
fn text_output_reports_status_and_centers() {
    let out = run_fixture("cusp", &["--emit", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("status: resolved (exit 0)"));
    assert!(text.contains("blow up"));
}

#[test]
fn checks_and_independence_pass_on_a_multi_contact_fixture() {
    let out = run_fixture("node", &["--check", "--independence"]);
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(!err.contains("FAIL") && !err.contains("DIVERGENT"), "{err}");
    assert!(err.contains("independence: identical"));
}

#[test]
fn mode_override_changes_the_run() {
    let reduce = run_fixture("mo_cusp", &["--emit", "text"]);
    let princip = run_fixture("mo_cusp", &["--mode", "princip", "--emit", "text"]);
    assert_eq!(princip.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&reduce.stdout).contains("centers: 2,"));
    assert!(String::from_utf8_lossy(&princip.stdout).contains("centers: 8,"));
}
