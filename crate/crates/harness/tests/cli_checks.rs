//! End-to-end checks of the command-line binary: each subcommand runs
//! against a temporary directory, outputs land where pointed, headers and
//! row counts match, reruns are byte-identical, and malformed input exits
//! nonzero with a diagnostic instead of panicking.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fairlink"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary spawns");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .expect("output file readable")
        .lines()
        .map(str::to_string)
        .collect()
}

// ---- scheduling sweep ----

#[test]
fn schedule_sim_writes_expected_rows_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("metrics.csv");
    let args = |out: &Path| {
        vec![
            "schedule-sim".to_string(),
            "--drops".into(),
            "3".into(),
            "--slots".into(),
            "40".into(),
            "--seed".into(),
            "11".into(),
            "--snr-db".into(),
            "5".into(),
            "--delay".into(),
            "0".into(),
            "--delay".into(),
            "4".into(),
            "--scheme".into(),
            "robust-immediate".into(),
            "--scheme".into(),
            "nonrobust(0.9)".into(),
            "--out".into(),
            out.display().to_string(),
        ]
    };
    let out = run_ok(bin().args(args(&csv)));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("seed 11"),
        "stdout echoes the seed: {stdout}"
    );

    let rows = lines(&csv);
    assert_eq!(rows[0], fairlink::experiment::METRICS_HEADER);
    // 2 schemes × 2 delays × 1 SNR data rows after the header.
    assert_eq!(rows.len(), 1 + 4, "one row per sweep cell: {rows:?}");
    for row in &rows[1..] {
        assert_eq!(row.split(',').count(), 9, "malformed row: {row}");
    }

    let first = fs::read(&csv).unwrap();
    let csv2 = dir.path().join("metrics2.csv");
    run_ok(bin().args(args(&csv2)));
    assert_eq!(
        first,
        fs::read(&csv2).unwrap(),
        "identical run, identical bytes"
    );
}

#[test]
fn schedule_sim_respects_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("scenario.json");
    fs::write(
        &cfg_path,
        r#"{
            "seed": 123,
            "drops": 2,
            "slots": 30,
            "snr_db": [5.0],
            "delays": [2],
            "schemes": ["perfect-csi", "nonrobust(0.8)"]
        }"#,
    )
    .unwrap();
    let csv = dir.path().join("metrics.csv");
    let out = run_ok(bin().args([
        "--config",
        cfg_path.to_str().unwrap(),
        "schedule-sim",
        "--out",
        csv.to_str().unwrap(),
    ]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("seed 123"),
        "config seed in effect: {stdout}"
    );

    let rows = lines(&csv);
    assert_eq!(rows.len(), 1 + 2, "two configured schemes, one cell each");
    assert!(rows[1].starts_with("perfect-csi,2,5"), "row: {}", rows[1]);
    assert!(
        rows[2].starts_with("nonrobust(0.8),2,5"),
        "row: {}",
        rows[2]
    );
}

// ---- single-link curves ----

#[test]
fn rate_curve_writes_header_and_grid() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rates.csv");
    run_ok(bin().args([
        "rate-curve",
        "--points",
        "15",
        "--snr-db",
        "5",
        "--delay",
        "4",
        "--out",
        csv.to_str().unwrap(),
    ]));
    let rows = lines(&csv);
    assert_eq!(rows[0], fairlink::curves::RATE_HEADER);
    assert!(
        rows.len() > 15,
        "at least one rule over 15 grid points: {}",
        rows.len()
    );
}

#[test]
fn uncertainty_curve_covers_delay_grid_per_snr() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("eps.csv");
    run_ok(bin().args([
        "uncertainty-curve",
        "--max-delay",
        "6",
        "--out",
        csv.to_str().unwrap(),
    ]));
    let rows = lines(&csv);
    assert_eq!(rows[0], fairlink::curves::UNCERTAINTY_HEADER);
    // Default scenario has two SNR points; delays 0..=6 each.
    assert_eq!(rows.len(), 1 + 2 * 7, "rows: {rows:?}");
}

// ---- lookup tables ----

#[test]
fn lut_build_then_inspect_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("table.csv");
    run_ok(bin().args([
        "lut",
        "build",
        "--points",
        "32",
        "--snr-db",
        "5",
        "--delay",
        "4",
        "--out",
        csv.to_str().unwrap(),
    ]));
    let out = run_ok(bin().args(["lut", "inspect", csv.to_str().unwrap()]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("points: 32"),
        "inspect reports the grid size: {stdout}"
    );
    assert!(
        stdout.contains("rate span"),
        "inspect reports the rate span: {stdout}"
    );
}

// ---- failure paths ----

#[test]
fn bad_scheme_token_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("metrics.csv");
    let out = bin()
        .args([
            "schedule-sim",
            "--scheme",
            "clairvoyant",
            "--out",
            csv.to_str().unwrap(),
        ])
        .output()
        .expect("binary spawns");
    assert!(!out.status.success(), "unknown scheme must be rejected");
    assert!(!csv.exists(), "no output on failure");
}

#[test]
fn malformed_config_exits_nonzero_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("scenario.json");
    fs::write(&cfg_path, r#"{"drops": "many"}"#).unwrap();
    let csv = dir.path().join("metrics.csv");
    let out = bin()
        .args([
            "--config",
            cfg_path.to_str().unwrap(),
            "schedule-sim",
            "--out",
            csv.to_str().unwrap(),
        ])
        .output()
        .expect("binary spawns");
    assert!(!out.status.success(), "malformed config must be rejected");
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(
        stderr.contains("fairlink:"),
        "diagnostic on stderr: {stderr}"
    );
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("scenario.json");
    fs::write(&cfg_path, r#"{"drps": 5}"#).unwrap();
    let out = bin()
        .args([
            "--config",
            cfg_path.to_str().unwrap(),
            "uncertainty-curve",
            "--out",
            dir.path().join("eps.csv").to_str().unwrap(),
        ])
        .output()
        .expect("binary spawns");
    assert!(
        !out.status.success(),
        "typo'd field must be rejected, not ignored"
    );
}
