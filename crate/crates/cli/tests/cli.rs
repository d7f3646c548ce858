//! End-to-end checks of the `losmimo` binary: exit codes, file outputs,
//! overrides and determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_losmimo"))
}

fn write_config(dir: &Path, methods: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(
        &path,
        format!(
            r#"
schema_version = 1
carrier_frequency_hz = 62.0e9
snr_db = 20.0
d_star_m = 92.0
methods = {methods}

[range]
min_m = 10.0
max_m = 100.0
step_m = 10.0

[tx]
geometry = "linear"
count = 3
eta = 2

[rx]
geometry = "linear"
count = 3
eta = 2

[rounding]
rounds = 8
"#
        ),
    )
    .unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("binary runs");
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn design_writes_expected_files() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"["ula", "co", "co_rr", "es"]"#);
    let out_dir = dir.path().join("results");
    let out = run_ok(bin().arg("design").arg(&config).arg("--out-dir").arg(&out_dir));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for tag in ["ula", "co", "co_rr", "es"] {
        assert!(out_dir.join(format!("capacity_{tag}.csv")).exists());
        assert!(out_dir.join(format!("tx_coords_{tag}.txt")).exists());
        assert!(out_dir.join(format!("rx_coords_{tag}.txt")).exists());
        assert!(stdout.contains(&format!("method={tag}")), "{stdout}");
    }
    assert!(out_dir.join("trace_co.log").exists());
    assert!(out_dir.join("trace_co_rr.log").exists());
    assert!(out_dir.join("summary.txt").exists());
    assert!(!out_dir.join("trace_ula.log").exists());
    assert!(!out_dir.join("trace_es.log").exists());
}

#[test]
fn method_override_limits_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"["ula", "co", "co_rr", "es"]"#);
    let out_dir = dir.path().join("results");
    run_ok(
        bin()
            .arg("design")
            .arg(&config)
            .arg("--method")
            .arg("ula")
            .arg("--out-dir")
            .arg(&out_dir),
    );
    assert!(out_dir.join("capacity_ula.csv").exists());
    assert!(!out_dir.join("capacity_co.csv").exists());
}

#[test]
fn invalid_config_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.toml");
    fs::write(&config, "schema_version = 1\n").unwrap();
    let out = bin().arg("design").arg(&config).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("error"), "{stderr}");
}

#[test]
fn missing_config_fails() {
    let out = bin().arg("design").arg("/nonexistent/config.toml").output().unwrap();
    assert!(!out.status.success());
}

#[test]
fn es_budget_refusal_and_force() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        r#"
schema_version = 1
carrier_frequency_hz = 62.0e9
snr_db = 20.0
methods = ["es"]

[range]
min_m = 10.0
max_m = 100.0
step_m = 10.0

[tx]
geometry = "linear"
count = 3
eta = 2
aperture_m = 1.0

[rx]
geometry = "linear"
count = 3
eta = 2
aperture_m = 1.0

[es]
max_evaluations = 5
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("results");
    let refused = bin()
        .arg("design")
        .arg(&config)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(!refused.status.success());
    let stderr = String::from_utf8_lossy(&refused.stderr);
    assert!(stderr.contains("budget"), "{stderr}");

    run_ok(
        bin()
            .arg("design")
            .arg(&config)
            .arg("--es-force")
            .arg("--out-dir")
            .arg(&out_dir),
    );
    assert!(out_dir.join("capacity_es.csv").exists());
}

#[test]
fn empty_method_override_warns_and_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "[]");
    let out = run_ok(bin().arg("design").arg(&config));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning"), "{stderr}");
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), r#"["co_rr"]"#);
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    run_ok(bin().arg("design").arg(&config).arg("--out-dir").arg(&out1));
    run_ok(bin().arg("design").arg(&config).arg("--out-dir").arg(&out2));
    let mut names: Vec<_> = fs::read_dir(&out1)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(!names.is_empty());
    for name in names {
        let a = fs::read(out1.join(&name)).unwrap();
        let b = fs::read(out2.join(&name)).unwrap();
        assert_eq!(a, b, "{name:?} differs");
    }
}
