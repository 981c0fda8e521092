//! End-to-end checks of the binary: exit codes, file outputs, determinism.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_nehari")
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("nehari-cli-{tag}-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, body).unwrap();
    path
}

fn run(config: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .arg("--config")
        .arg(config)
        .args(args)
        .output()
        .expect("binary runs")
}

fn scalar_config(out_dir: &Path) -> String {
    format!(
        r#"
schema_version = 1

[problem]
dimension = 1
q = 2.0
lambda = [1.0]
mu = [1.0]

[grid]
cells = 1200

[solver]
multistart = 0
seed = 3

[run]
out_dir = "{}"
"#,
        out_dir.display()
    )
}

#[test]
fn solve_writes_reports_and_exits_zero() {
    let dir = temp_dir("solve");
    let out = dir.join("out");
    let config = write_config(&dir, &scalar_config(&out));
    let result = run(&config, &["solve"]);
    assert!(result.status.success(), "{result:?}");

    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("status: converged"));
    assert!(report.contains("classification: nontrivial"));
    // level ≈ 4/3
    let level_line = report.lines().find(|l| l.starts_with("level: ")).unwrap();
    let level: f64 = level_line["level: ".len()..].parse().unwrap();
    assert!((level - 4.0 / 3.0).abs() / (4.0 / 3.0) < 1e-3, "level {level}");

    let fields = fs::read_to_string(out.join("fields.csv")).unwrap();
    assert!(fields.starts_with("r,u1\n"));
    assert_eq!(fields.lines().count(), 1202);
    assert!(out.join("trace.csv").exists());
    fs::remove_dir_all(dir).ok();
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = temp_dir("determinism");
    let out = dir.join("out");
    let config = write_config(
        &dir,
        &format!(
            r#"
schema_version = 1

[problem]
dimension = 1
q = 1.5
lambda = [1.0, 2.0]
mu = [1.0, 1.0]
coupling = 0.4

[grid]
cells = 400

[solver]
multistart = 2
seed = 11

[run]
out_dir = "{}"
"#,
            out.display()
        ),
    );
    assert!(run(&config, &["solve"]).status.success());
    let first_fields = fs::read(out.join("fields.csv")).unwrap();
    let first_trace = fs::read(out.join("trace.csv")).unwrap();
    assert!(run(&config, &["solve"]).status.success());
    assert_eq!(first_fields, fs::read(out.join("fields.csv")).unwrap());
    assert_eq!(first_trace, fs::read(out.join("trace.csv")).unwrap());
    fs::remove_dir_all(dir).ok();
}

#[test]
fn config_violating_growth_condition_exits_one() {
    let dir = temp_dir("growth");
    let out = dir.join("out");
    let config = write_config(&dir, &scalar_config(&out));
    let result = run(
        &config,
        &["--set", "problem.q=3.0", "--set", "problem.dimension=3", "solve"],
    );
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("n/(n-2)"), "stderr: {stderr}");
    fs::remove_dir_all(dir).ok();
}

#[test]
fn malformed_config_exits_one_with_location() {
    let dir = temp_dir("malformed");
    let config = write_config(&dir, "schema_version = 1\n[problem\n");
    let result = run(&config, &["solve"]);
    assert_eq!(result.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("line"), "stderr: {stderr}");
    fs::remove_dir_all(dir).ok();
}

#[test]
fn nonconvergence_exits_two() {
    let dir = temp_dir("noconv");
    let out = dir.join("out");
    let config = write_config(&dir, &scalar_config(&out));
    let result = run(
        &config,
        &["--set", "solver.max_iter=2", "--set", "solver.tol_residual=1e-13", "solve"],
    );
    assert_eq!(result.status.code(), Some(2));
    fs::remove_dir_all(dir).ok();
}

#[test]
fn invalid_bracket_exits_three() {
    let dir = temp_dir("bracket");
    let out = dir.join("out");
    let config = write_config(
        &dir,
        &format!(
            r#"
schema_version = 1

[problem]
dimension = 1
q = 1.5
lambda = [1.0, 2.0]
mu = [1.0, 1.0]
coupling = 0.4

[grid]
cells = 300

[solver]
multistart = 0
seed = 1

[run]
out_dir = "{}"

[threshold]
bracket = [0.05, 1.0]
width = 0.2
"#,
            out.display()
        ),
    );
    // q < 2: both endpoints classify nontrivial, so the bracket is invalid
    let result = run(&config, &["threshold"]);
    assert_eq!(result.status.code(), Some(3));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("invalid bracket"), "stderr: {stderr}");
    fs::remove_dir_all(dir).ok();
}

#[test]
fn corrupted_rearrangement_exits_four() {
    let dir = temp_dir("corrupt");
    let out = dir.join("out");
    let config = write_config(
        &dir,
        &format!(
            r#"
schema_version = 1

[problem]
dimension = 1
q = 1.5
lambda = [1.0, 2.0]
mu = [1.0, 1.0]
coupling = 0.4

[grid]
cells = 300

[solver]
seed = 5

[run]
out_dir = "{}"

[audit]
fields = 5
induction = false
corrupt_rearrangement = true
"#,
            out.display()
        ),
    );
    let result = run(&config, &["audit"]);
    assert_eq!(result.status.code(), Some(4));
    assert!(out.join("audit.csv").exists());
    fs::remove_dir_all(dir).ok();
}

#[test]
fn audit_clean_run_exits_zero() {
    let dir = temp_dir("audit-ok");
    let out = dir.join("out");
    let config = write_config(
        &dir,
        &format!(
            r#"
schema_version = 1

[problem]
dimension = 1
q = 1.5
lambda = [1.0, 2.0]
mu = [1.0, 1.0]
coupling = 0.3

[grid]
cells = 400

[solver]
multistart = 0
seed = 5

[run]
out_dir = "{}"

[audit]
fields = 25
induction = true
"#,
            out.display()
        ),
    );
    let result = run(&config, &["audit"]);
    assert_eq!(result.status.code(), Some(0), "{result:?}");
    let induction = fs::read_to_string(out.join("induction.txt")).unwrap();
    assert!(induction.contains("ok: true"));
    let audit = fs::read_to_string(out.join("audit.csv")).unwrap();
    assert!(audit.lines().count() > 25);
    fs::remove_dir_all(dir).ok();
}
