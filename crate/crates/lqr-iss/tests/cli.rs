use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use lqr_iss::output::read_csv_rows;

fn run(dir: &Path, sub: &str, config: &str, extra: &[&str]) -> Output {
    let cfg = dir.join(format!("{sub}.json"));
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_lqr-iss"))
        .current_dir(dir)
        .arg(sub)
        .arg("--config")
        .arg(&cfg)
        .args(extra)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "certify", "{\"plant\": ", &[]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn unknown_fields_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "flow", r#"{"flow": {"kind": "natural", "stepsize": 1}}"#, &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_config_file_is_a_config_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_lqr-iss"))
        .args(["saturation", "--config", "/nonexistent/cfg.json"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
}

#[test]
fn certify_scalar_plant_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "certify", r#"{"certify": {"samples_per_radius": 20}}"#, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv_rows(&dir.path().join("out/lemmas.csv")).unwrap();
    assert_eq!(header[0], "lemma_id");
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r[8] == "true"));
}

#[test]
fn certify_random_plant_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"plant": {"random": {"n": 4, "m": 2, "seed": 7}}, "certify": {"samples_per_radius": 20}}"#;
    let o = run(dir.path(), "certify", cfg, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("out/plant.json").exists());
}

#[test]
fn huge_constant_push_leaves_the_admissible_set() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"disturbance": {"kind": "constant", "amplitude": 1e8}, "flow": {"s_max": 5}}"#;
    let o = run(dir.path(), "flow", cfg, &[]);
    assert_eq!(code(&o), 3);
    let doc: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/trajectory.json")).unwrap()).unwrap();
    assert_eq!(doc["result"]["exit"], "left_admissible_set");
}

#[test]
fn empty_saturation_grid_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "saturation", r#"{"saturation": {"z_grid": []}}"#, &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn non_stabilizing_initial_gain_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "flow", r#"{"flow": {"initial_gain": {"matrix": [[0.5]]}}}"#, &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn estimator_disturbance_is_rejected_by_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"disturbance": {"kind": "estimator", "radius": 0.01, "num_samples": 4, "scheme": "two_point_sphere"}}"#;
    let o = run(dir.path(), "sweep", cfg, &[]);
    assert_eq!(code(&o), 2);
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = r#"{"plant": {"random": {"n": 3, "m": 2, "seed": 11}},
        "flow": {"kind": "standard", "s_max": 5},
        "disturbance": {"kind": "bounded_noise", "amplitude": 0.05}, "seed": 4}"#;
    for d in [&a, &b] {
        assert_eq!(code(&run(d.path(), "flow", cfg, &[])), 0);
    }
    for name in ["trajectory.csv", "trajectory.json", "plant.json"] {
        let x = fs::read(a.path().join("out").join(name)).unwrap();
        let y = fs::read(b.path().join("out").join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn seed_override_is_echoed_and_changes_the_draw() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"flow": {"s_max": 1}, "output_dir": "a"}"#;
    assert_eq!(code(&run(dir.path(), "flow", cfg, &[])), 0);
    let cfg = r#"{"flow": {"s_max": 1}, "output_dir": "b"}"#;
    assert_eq!(code(&run(dir.path(), "flow", cfg, &["--seed", "99"])), 0);
    let text = fs::read_to_string(dir.path().join("b/trajectory.csv")).unwrap();
    let echo = text.lines().find(|l| l.starts_with("# config: ")).unwrap();
    let cfg: serde_json::Value = serde_json::from_str(echo.trim_start_matches("# config: ")).unwrap();
    assert_eq!(cfg["seed"], 99);
    let (_, ra) = read_csv_rows(&dir.path().join("a/trajectory.csv")).unwrap();
    let (_, rb) = read_csv_rows(&dir.path().join("b/trajectory.csv")).unwrap();
    assert_ne!(ra[0], rb[0]);
}

#[test]
fn json_artifacts_carry_version_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), "counterexample", r#"{"counterexample": {"chi0": [1.0], "t_max": 100}}"#, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/counterexample.json")).unwrap()).unwrap();
    assert!(doc["version"].as_str().unwrap().starts_with("lqr-iss "));
    assert_eq!(doc["command"], "counterexample");
    assert_eq!(doc["config"]["counterexample"]["t_max"], 100.0);
    assert_eq!(doc["result"]["dichotomy_holds"], true);
}

#[test]
fn plant_file_round_trips_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"plant": {"random": {"n": 2, "m": 1, "seed": 5}}, "certify": {"samples_per_radius": 2}}"#;
    assert_eq!(code(&run(dir.path(), "certify", cfg, &[])), 0);
    fs::rename(dir.path().join("out/plant.json"), dir.path().join("p.json")).unwrap();
    let cfg = r#"{"plant": {"path": "p.json"}, "certify": {"samples_per_radius": 2}, "output_dir": "again"}"#;
    assert_eq!(code(&run(dir.path(), "certify", cfg, &[])), 0);
    let a = fs::read(dir.path().join("p.json")).unwrap();
    let b = fs::read(dir.path().join("again/plant.json")).unwrap();
    assert_eq!(a, b);
}
