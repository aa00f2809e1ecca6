use std::path::Path;
use std::process::{Command, Output};

fn rps(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rps"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[grid\nhalf_width = ");
    let out = rps(&["solve"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("invalid configuration"));
}

#[test]
fn unknown_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "sed = 3\n");
    let out = rps(&["verify"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_ladder_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "a.toml",
        "[oracle]\noracle = \"a\"\nladder = []\n",
    );
    let out = rps(&["oracle"], &cfg, &dir.path().join("out"));
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn tightened_decomposition_tolerance_fails_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "tight.toml",
        "[verify.decomposition_residual]\ntolerance = 1e-16\n",
    );
    let out = rps(
        &["verify", "--check", "decomposition_residual"],
        &cfg,
        &dir.path().join("out"),
    );
    assert_eq!(out.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL decomposition_residual"), "{stdout}");
    assert!(String::from_utf8_lossy(&out.stderr).contains("decomposition_residual"));
}

#[test]
fn check_flag_runs_only_the_named_check() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", "");
    let out_dir = dir.path().join("out");
    let out = rps(
        &["verify", "--check", "nonresonant_integral"],
        &cfg,
        &out_dir,
    );
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("verify_report.json")).unwrap())
            .unwrap();
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 1);
    assert_eq!(checks[0]["name"], "nonresonant_integral");
}

#[test]
fn unknown_check_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "v.toml", "");
    let out = rps(
        &["verify", "--check", "nope"],
        &cfg,
        &dir.path().join("out"),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn free_run_keeps_mass_column_constant() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "free.toml",
        r#"
[grid]
half_width = 20.0
size = 1024

[potential]
kind = "zero"

[initial]
kind = "gaussian"

[evolution]
dt = 0.01
t_final = 0.2
"#,
    );
    let out_dir = dir.path().join("out");
    let out = rps(&["solve"], &cfg, &out_dir);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header
        .iter()
        .position(|h| *h == "mass")
        .expect("mass column");
    let masses: Vec<f64> = lines
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect();
    assert!(masses.len() > 10);
    assert!(masses.iter().all(|m| (m - masses[0]).abs() <= 1e-10));
    assert!(out_dir.join("summary.json").exists() && out_dir.join("manifest.json").exists());
}

#[test]
fn boundary_contamination_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "wide.toml",
        r#"
[grid]
half_width = 5.0
size = 256

[potential]
kind = "zero"

[initial]
kind = "gaussian"
width = 2.0

[evolution]
dt = 0.01
t_final = 2.0
"#,
    );
    let out = rps(&["solve"], &cfg, &dir.path().join("out"));
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn oracle_writes_growth_and_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.toml",
        "[oracle]\noracle = \"b\"\nr = 2.0\ns = 2.25\nladder = [32.0, 64.0, 128.0, 256.0]\n",
    );
    let out_dir = dir.path().join("out");
    let out = rps(&["oracle"], &cfg, &out_dir);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let fit: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out_dir.join("fit.json")).unwrap()).unwrap();
    assert!((fit["slope"].as_f64().unwrap() - 0.25).abs() < 0.15);
    let csv = std::fs::read_to_string(out_dir.join("growth.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
}
