//! End-to-end checks of the `steklov` binary: exit codes, CSV artifacts,
//! determinism, and the documented error paths.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_steklov"))
}

fn repo_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(subcommand: &str, config: &Path, out: &Path) -> Output {
    binary()
        .args([
            subcommand,
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> Vec<String> {
    let text = std::fs::read_to_string(path).expect("CSV exists");
    assert!(!text.contains('\r'), "CSV must use LF line endings");
    text.lines().map(str::to_owned).collect()
}

#[test]
fn eccentricity_sweep_passes_and_writes_ten_rows() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("sweep", &repo_config("eccentricity.toml"), dir.path());
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let lines = read_csv(&dir.path().join("eccentricity.csv"));
    assert_eq!(lines[0], "d,mu1,mu1_concentric,theta_bound,residual_gamma1");
    assert_eq!(lines.len(), 11, "header plus ten offsets");
    assert!(dir.path().join("eccentricity.svg").exists());
}

#[test]
fn lemmas_assertions_pass() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("lemmas", &repo_config("lemmas.toml"), dir.path());
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("4/4 assertions passed"), "{stdout}");
}

#[test]
fn exact_spectrum_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let output = run("exact", &repo_config("exact.toml"), dir.path());
    assert_eq!(output.status.code(), Some(0), "{output:?}");
    let lines = read_csv(&dir.path().join("exact.csv"));
    // Row for l = 1 of the n = 3, R1 = 1, R2 = 2 shell: mu = 7/17.
    let fields: Vec<&str> = lines[2].split(',').collect();
    let mu: f64 = fields[1].parse().unwrap();
    assert!((mu - 7.0 / 17.0).abs() < 1e-15);
    let multiplicity: f64 = fields[2].parse().unwrap();
    assert_eq!(multiplicity, 3.0);
}

#[test]
fn csv_values_round_trip_and_reruns_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let config = repo_config("dumbbell.toml");
    assert_eq!(run("dumbbell", &config, dir_a.path()).status.code(), Some(0));
    assert_eq!(run("dumbbell", &config, dir_b.path()).status.code(), Some(0));
    let a = std::fs::read(dir_a.path().join("dumbbell.csv")).unwrap();
    let b = std::fs::read(dir_b.path().join("dumbbell.csv")).unwrap();
    assert_eq!(a, b, "reruns must produce byte-identical CSV");
    let svg_a = std::fs::read(dir_a.path().join("dumbbell.svg")).unwrap();
    let svg_b = std::fs::read(dir_b.path().join("dumbbell.svg")).unwrap();
    assert_eq!(svg_a, svg_b);

    for line in &read_csv(&dir_a.path().join("dumbbell.csv"))[1..] {
        for field in line.split(',') {
            let value: f64 = field.parse().expect("parsable float");
            assert_eq!(crate_format(value), field, "17-digit round trip");
        }
    }
}

fn crate_format(v: f64) -> String {
    format!("{v:.16e}")
}

#[test]
fn malformed_config_exits_2_without_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("broken.toml");
    std::fs::write(&config, "[domain]\nkind = \"eccentric\"\nr1 = \"oops\"").unwrap();
    let out = dir.path().join("out");
    let output = run("sweep", &config, &out);
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    assert!(!out.exists(), "no output directory on config failure");
}

#[test]
fn unknown_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("unknown.toml");
    std::fs::write(
        &config,
        "[domain]\nkind = \"concentric\"\nn = 2\nr1 = 1.0\nr2 = 2.0\nsurprise = 1\n\n[exact]\nl_max = 3\n",
    )
    .unwrap();
    let output = run("exact", &config, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(2), "{output:?}");
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("surprise"), "{stderr}");
}

#[test]
fn invalid_geometry_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("geometry.toml");
    // Hole larger than the outer circle.
    std::fs::write(
        &config,
        "[domain]\nkind = \"concentric\"\nn = 2\nr1 = 3.0\nr2 = 2.0\n\n[solver]\nbasis_order = 8\n",
    )
    .unwrap();
    let output = run("solve", &config, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}

#[test]
fn diagnostic_breach_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("tight.toml");
    // An unreachable flux gate turns the diagnostic into a failure.
    std::fs::write(
        &config,
        "[domain]\nkind = \"eccentric\"\nn = 2\nr1 = 1.0\nr2 = 2.0\nd = 0.5\n\n\
         [solver]\nbasis_order = 16\nflux_gate = 1e-16\n",
    )
    .unwrap();
    let output = run("solve", &config, &dir.path().join("out"));
    assert_eq!(output.status.code(), Some(3), "{output:?}");
}

#[test]
fn failed_assertion_exits_1_but_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("degenerate.toml");
    // A zero tolerance of 1.0 swallows the whole field into the zero band,
    // so no field has the expected two nodal domains.
    std::fs::write(
        &config,
        "[domain]\nkind = \"concentric\"\nn = 2\nr1 = 1.0\nr2 = 2.0\n\n\
         [solver]\nbasis_order = 16\n\n\
         [nodal]\nresolutions = [256]\nzero_tol = 1.0\nrandom_combinations = 1\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let output = run("nodal", &config, &out);
    assert_eq!(output.status.code(), Some(1), "{output:?}");
    assert!(out.join("nodal.csv").exists(), "data still written");
}

#[test]
fn env_overrides_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let output = binary()
        .args([
            "dumbbell",
            "--config",
            repo_config("dumbbell.toml").to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .env("STEKLOV_THREADS", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2), "{output:?}");
}
