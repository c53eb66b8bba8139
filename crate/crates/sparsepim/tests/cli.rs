//! End-to-end checks of the `sparsepim` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sparsepim"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn stats_prints_table_row() {
    let out = bin().args(["stats", "--matrix"]).arg(fixture("small_general.mtx")).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("shape: 4 x 4"));
    assert!(text.contains("nnz: 6"));
    assert!(text.contains("sparsity: 3.75e-01"));
    assert!(text.contains("empty-rows: 1"));
}

#[test]
fn stats_reports_symmetric_expansion() {
    let out =
        bin().args(["stats", "--matrix"]).arg(fixture("small_symmetric.mtx")).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("nnz: 6 (stored 4, symmetric expanded to 6)"));
}

#[test]
fn verify_all_schemes_pass_on_random_matrix() {
    let out = bin()
        .args([
            "verify",
            "--generate",
            "uniform:n=64,nnz=600",
            "--seed",
            "5",
            "--dtype",
            "int64",
            "--cores",
            "8",
            "--vertical",
            "4",
        ])
        .output()
        .unwrap();
    let text = stdout(&out);
    assert!(out.status.success(), "verify failed:\n{text}");
    assert!(text.contains("25 registered kernels"));
    assert!(text.contains("all match"));
    assert!(!text.contains("FAIL"));
}

#[test]
fn unknown_scheme_is_usage_error() {
    let out = bin()
        .args([
            "run",
            "--generate",
            "uniform:n=16,nnz=32",
            "--seed",
            "1",
            "--scheme",
            "CSR.bogus",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_requires_seed() {
    let out = bin()
        .args(["stats", "--generate", "uniform:n=16,nnz=32"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn run_emits_json_report() {
    let out = bin()
        .args([
            "run",
            "--generate",
            "power-law:n=128,nnz=900,exponent=2.1",
            "--seed",
            "7",
            "--scheme",
            "COO.nnz-lf",
            "--dtype",
            "fp32",
            "--cores",
            "8",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["scheme_name"], "COO.nnz-lf");
    assert_eq!(json["n_cores"], 8);
    assert!(json["phase_seconds"]["load"].as_f64().unwrap() > 0.0);
}

#[test]
fn identical_spec_and_seed_give_identical_bytes() {
    let args = [
        "sweep",
        "--generate",
        "uniform:n=128,nnz=1500",
        "--seed",
        "11",
        "--scheme",
        "COO.nnz,DCOO",
        "--dtype",
        "int32",
        "--cores",
        "8,16",
        "--vertical",
        "2,4",
    ];
    let a = bin().args(args).output().unwrap();
    let b = bin().args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.lines().last().unwrap().starts_with("# best scheme="));
}

#[test]
fn env_var_supplies_default_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("machine.toml");
    std::fs::write(&config, "n_cores = 6\n").unwrap();
    let out = bin()
        .env("SPARSEPIM_CONFIG", &config)
        .args([
            "run",
            "--generate",
            "uniform:n=32,nnz=200",
            "--seed",
            "3",
            "--scheme",
            "COO.row",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["n_cores"], 6);
}

#[test]
fn config_file_overrides_machine() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("machine.toml");
    std::fs::write(&config, "n_cores = 4\nbus_bandwidth_per_rank = 1.0e9\n").unwrap();
    let out = bin()
        .args([
            "run",
            "--generate",
            "uniform:n=32,nnz=200",
            "--seed",
            "3",
            "--scheme",
            "CSR.row",
        ])
        .arg("--config")
        .arg(&config)
        .output()
        .unwrap();
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(json["n_cores"], 4);
}
