use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[run]
experiment = "spectrum"

[lattice]
omega0 = 40.0
half_width = 6.0
n_points = 121

[gain]
gamma = 1.0
kappa = 1.0
z = 1.0
compensate_dispersion = true

[gate]
duration = 20.0

[noise]
seed = 9
n_realizations = 500
"#;

fn sqvac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sqvac"))
        .args(args)
        .env("RUST_LOG", "off")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn error_record(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stderr).unwrap_or_else(|_| panic!("stderr: {}", String::from_utf8_lossy(&out.stderr)))
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(sqvac(&[]).status.code(), Some(1));
    assert_eq!(sqvac(&["a.toml", "--workers", "many"]).status.code(), Some(1));
    assert_eq!(sqvac(&["a.toml", "--experiment", "nonsense"]).status.code(), Some(1));
    assert_eq!(sqvac(&["--help"]).status.code(), Some(0));
}

#[test]
fn even_n_points_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("121", "120"));
    let out = sqvac(&[&cfg]);
    assert_eq!(out.status.code(), Some(2));
    let rec = error_record(&out);
    assert_eq!(rec["error"], "config");
    assert_eq!(rec["field"], "lattice.n_points");
    assert_eq!(rec["line"], 8);
    assert_eq!(rec["exit_code"], 2);
}

#[test]
fn missing_config_and_under_resolved_grid_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = sqvac(&[dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "config");

    let cfg = write_config(
        dir.path(),
        &(SMALL.replace("\"spectrum\"", "\"sfg-spectrum\"") + "\n[sfg]\nk2prime = 40.0\n"),
    );
    let out = sqvac(&[&cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "under_resolved");
}

#[test]
fn unwritable_output_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let out = sqvac(&[&cfg, "--output-dir", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"], "io");
}

#[test]
fn runs_are_byte_identical_across_repeats_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let runs: Vec<_> = [("a", "1"), ("b", "1"), ("c", "6")]
        .iter()
        .map(|(name, w)| {
            let out_dir = dir.path().join(name);
            let out = sqvac(&[&cfg, "--output-dir", out_dir.to_str().unwrap(), "--workers", w]);
            assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
            ["spectrum.csv", "spectrum.json", "report.txt"].map(|f| fs::read(out_dir.join(f)).unwrap())
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn overrides_apply_and_change_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(sqvac(&[&cfg, "--output-dir", a.to_str().unwrap()]).status.code(), Some(0));
    let out = sqvac(&[&cfg, "--output-dir", b.to_str().unwrap(), "--seed", "10", "--experiment", "mode-energy"]);
    assert_eq!(out.status.code(), Some(0));
    let ja: serde_json::Value = serde_json::from_slice(&fs::read(a.join("spectrum.json")).unwrap()).unwrap();
    let jb: serde_json::Value = serde_json::from_slice(&fs::read(b.join("mode_energy.json")).unwrap()).unwrap();
    assert_eq!(jb["meta"]["seed"], 10);
    assert_eq!(jb["meta"]["experiment"], "mode-energy");
    assert_ne!(ja["meta"]["config_sha256"], jb["meta"]["config_sha256"]);
}

#[test]
fn default_output_dir_sits_next_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("[run]\n", "[run]\noutput_dir = \"results\"\n"));
    assert_eq!(sqvac(&[&cfg]).status.code(), Some(0));
    assert!(dir.path().join("results/spectrum.csv").exists());
}
