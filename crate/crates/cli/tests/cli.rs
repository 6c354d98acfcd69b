//! End-to-end tests against the compiled `recoil` binary: exit codes,
//! output schemas, config/flag precedence, and determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn recoil(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_recoil"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

/// Temp config file that cleans up after itself.
struct TempConfig {
    path: PathBuf,
}

impl TempConfig {
    fn new(tag: &str, contents: &str) -> Self {
        let path = std::env::temp_dir().join(format!("recoil-test-{}-{tag}.conf", std::process::id()));
        std::fs::write(&path, contents).expect("temp config writes");
        TempConfig { path }
    }

    fn arg(&self) -> &str {
        self.path.to_str().expect("temp path is utf-8")
    }
}

impl Drop for TempConfig {
    fn drop(&mut self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

const SWEEP_FLAGS: [&str; 12] = [
    "--epsilon-ld", "0.4",
    "--omega-ratio", "0.25",
    "--gamma-ratio", "0.1",
    "--omega-k-min", "1.01",
    "--omega-k-max", "1.21",
    "--n-points", "5",
];

#[test]
fn unknown_config_keys_exit_2_and_name_the_key() {
    let cfg = TempConfig::new("unknown-key", "epsilon = 0.8\n");
    let out = recoil(&["spectrum", "--config", cfg.arg()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("epsilon"), "stderr: {}", stderr(&out));
}

#[test]
fn config_type_errors_exit_2_and_carry_the_line() {
    let cfg = TempConfig::new("type-error", "gamma_ratio = 0.1\nn_points = soon\n");
    let out = recoil(&["spectrum", "--config", cfg.arg()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("line 2") && err.contains("n_points"), "stderr: {err}");
}

#[test]
fn missing_config_file_exits_2() {
    let out = recoil(&["spectrum", "--config", "/nonexistent/recoil.conf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/nonexistent/recoil.conf"));
}

#[test]
fn pinned_and_automatic_truncation_conflict_at_the_flag_level() {
    let mut args = vec!["spectrum", "--n-max", "12", "--auto-truncation"];
    args.extend_from_slice(&SWEEP_FLAGS);
    let out = recoil(&args);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweeps_are_deterministic_and_unitary() {
    let mut args = vec!["spectrum"];
    args.extend_from_slice(&SWEEP_FLAGS);
    let first = recoil(&args);
    let second = recoil(&args);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", stderr(&first));
    assert_eq!(first.stdout, second.stdout, "repeat runs must be byte-identical");

    let text = stdout(&first);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("omega_k_over_Omega,R,T,unitarity_defect,n_max_used,converged")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 6);
        let defect: f64 = cols[3].parse().expect("defect parses");
        assert!(defect < 1e-6, "row {row}");
        assert_eq!(cols[5], "true");
    }
}

#[test]
fn flags_override_the_config_file() {
    let cfg = TempConfig::new(
        "override",
        "epsilon_ld = 0.4\nomega_ratio = 0.25\ngamma_ratio = 0.1\n\
         omega_k_min = 1.01\nomega_k_max = 1.21\nn_points = 5\n",
    );
    let out = recoil(&["spectrum", "--config", cfg.arg(), "--n-points", "3"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert_eq!(stdout(&out).lines().count(), 1 + 3);
}

#[test]
fn json_output_parses_and_mirrors_the_csv_fields() {
    let mut args = vec!["spectrum", "--format", "json"];
    args.extend_from_slice(&SWEEP_FLAGS);
    let out = recoil(&args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let points: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("json parses");
    let points = points.as_array().expect("top level is an array");
    assert_eq!(points.len(), 5);
    for p in points {
        for field in ["omega_k_over_omega", "R", "T", "unitarity_defect", "n_max_used", "converged"] {
            assert!(p.get(field).is_some(), "missing {field} in {p}");
        }
        assert!(p.get("channels").is_none(), "no channel detail unless asked");
    }
}

#[test]
fn ld_limit_reproduces_the_half_maximum_points_exactly() {
    let out = recoil(&[
        "ld-limit",
        "--gamma-ratio", "0.25",
        "--omega-k-min", "0.75",
        "--omega-k-max", "1.25",
        "--n-points", "3",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let reflectances: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|row| row.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(reflectances, vec![0.5, 1.0, 0.5]);
}

#[test]
fn starved_truncation_is_flagged_and_exits_3() {
    let out = recoil(&[
        "point",
        "--epsilon-ld", "2.0",
        "--omega-ratio", "0.15",
        "--gamma-ratio", "0.05",
        "--omega-k", "1.7",
        "--n-max", "0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    // the row is still written, flagged, before the nonzero exit
    let text = stdout(&out);
    let row = text.lines().nth(1).expect("data row present");
    assert!(row.ends_with(",false"), "row: {row}");
    assert!(stderr(&out).contains("convergence"));
}

#[test]
fn channel_detail_adds_per_channel_columns() {
    let out = recoil(&[
        "point",
        "--epsilon-ld", "0.4",
        "--omega-ratio", "0.25",
        "--gamma-ratio", "0.1",
        "--omega-k", "1.11",
        "--channel-detail",
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let header = text.lines().next().unwrap();
    assert!(header.contains("k_0,r2_0,t2_0"), "header: {header}");
    assert!(header.contains("k_4,r2_4,t2_4"), "header: {header}");
}

#[test]
fn output_flag_writes_the_file_instead_of_stdout() {
    let target = std::env::temp_dir().join(format!("recoil-test-{}-out.csv", std::process::id()));
    let target_str = target.to_str().unwrap();
    let mut args = vec!["spectrum", "--output", target_str];
    args.extend_from_slice(&SWEEP_FLAGS);
    let out = recoil(&args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&target).expect("output file exists");
    assert_eq!(written.lines().count(), 1 + 5);
    let _ = std::fs::remove_file(&target);
}

#[test]
fn validate_passes() {
    let out = recoil(&["validate"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("all checks passed"));
}
