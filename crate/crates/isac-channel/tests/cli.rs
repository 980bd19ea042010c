//! End-to-end checks of the isac-sim command-line interface.

use std::path::Path;
use std::process::Command;

fn binary() -> &'static str {
    env!("CARGO_BIN_EXE_isac-sim")
}

fn example_config() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs/indoor_ring.toml")
        .to_str()
        .unwrap()
        .to_string()
}

#[test]
fn validate_only_succeeds() {
    let out = Command::new(binary())
        .args(["run", "--config", &example_config(), "--validate-only"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("config ok"), "{stdout}");
}

#[test]
fn run_exports_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(binary())
        .args([
            "run",
            "--config",
            &example_config(),
            "--drops",
            "2",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "record_drop00000.json",
        "record_drop00001.json",
        "paths_drop00000.csv",
        "cir_comm_total_drop00000.bin",
        "cir_sensing_total_drop00001.json",
        "manifest.json",
    ] {
        assert!(dir.path().join(name).exists(), "{name} missing");
    }
}

#[test]
fn run_is_reproducible_across_invocations() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    for dir in [&dir_a, &dir_b] {
        let out = Command::new(binary())
            .args([
                "run",
                "--config",
                &example_config(),
                "--seed",
                "99",
                "--out",
                dir.path().to_str().unwrap(),
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    for entry in std::fs::read_dir(dir_a.path()).unwrap() {
        let entry = entry.unwrap();
        let other = dir_b.path().join(entry.file_name());
        assert_eq!(
            std::fs::read(entry.path()).unwrap(),
            std::fs::read(&other).unwrap(),
            "{:?} differs between runs",
            entry.file_name()
        );
    }
}

#[test]
fn campaign_writes_cdf_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(binary())
        .args([
            "campaign",
            "--config",
            &example_config(),
            "--sweep",
            "2,4",
            "--drops",
            "5",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cdf = std::fs::read_to_string(dir.path().join("cdf_sd_s.csv")).unwrap();
    assert_eq!(cdf.lines().count(), 1 + 2 * 5);
    assert!(dir.path().join("summary.csv").exists());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "carrier_hz = 1e9\n").unwrap();
    let out = Command::new(binary())
        .args(["run", "--config", bad.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // Infeasible sweep count also maps to the config exit code.
    let out = Command::new(binary())
        .args([
            "campaign",
            "--config",
            &example_config(),
            "--sweep",
            "50",
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let out = Command::new(binary())
        .args(["run", "--config", "/no/such/config.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}
