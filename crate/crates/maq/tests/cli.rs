use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn maq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_maq")).args(args).output().expect("run maq")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(command: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![command, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    maq(&args)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn empty_config_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "empty.json", "");
    let o = run("plane-classify", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid configuration"));
}

#[test]
fn malformed_and_unknown_keys_exit_two() {
    let dir = TempDir::new().unwrap();
    for (i, text) in ["{", r#"{"nonsense": 1}"#, r#"{"solve": {"grid": {"nx": 3, "ny": 3, "origin": [0, 1], "h": 0.1}}}"#]
        .iter()
        .enumerate()
    {
        let cfg = write_config(dir.path(), &format!("c{i}.json"), text);
        let o = run("solve", &cfg, &dir.path().join("out"), &[]);
        assert_eq!(o.status.code(), Some(2), "{text}");
    }
}

#[test]
fn mismatched_command_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"command": "tube"}"#);
    assert_eq!(run("flat", &cfg, &dir.path().join("out"), &[]).status.code(), Some(2));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let o = run("tube", &dir.path().join("absent.json"), &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unknown_command_is_a_usage_error() {
    assert_eq!(maq(&["frobnicate", "--config", "x.json"]).status.code(), Some(2));
}

#[test]
fn plane_classify_reports_expected_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"plane": {"a": [[2, 0], [0, 0.5]], "expect": {"omega_i": true, "omega_j": false, "omega_k": true}}}"#,
    );
    let out = dir.path().join("out");
    let o = run("plane-classify", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["status"], "pass");
    assert_eq!(r["values"]["flags"]["omega_i"], true);
    assert_eq!(r["values"]["flags"]["omega_j"], false);
    assert_eq!(r["values"]["flags"]["omega_k"], true);
}

#[test]
fn wrong_expectation_exits_one() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"plane": {"a": [[1, 2], [3, 4]], "expect": {"omega_i": true, "omega_j": true, "omega_k": true}}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run("plane-classify", &cfg, &out, &[]).status.code(), Some(1));
    assert_eq!(report(&out)["status"], "fail");
}

#[test]
fn counterexample_spot_value_and_checks() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", "{}");
    let out = dir.path().join("out");
    let o = run("counterexample", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out);
    assert_eq!(r["values"]["phi_2_1"].as_f64().unwrap(), 49.0 / 12.0);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["status"] == "pass"));
    let csv = std::fs::read_to_string(out.join("potential.csv")).unwrap();
    assert!(csv.starts_with("nx,ny,x0,y0,h\n65,33,"));
}

#[test]
fn same_seed_gives_identical_outputs() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"algebra": {"pairs": 500, "planes": 50, "frames": 5, "matrices": 400}}"#);
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for out in [&a, &b] {
        assert_eq!(run("algebra-verify", &cfg, out, &["--seed", "42"]).status.code(), Some(0));
    }
    assert_eq!(run("algebra-verify", &cfg, &c, &["--seed", "7"]).status.code(), Some(0));
    let read = |p: &Path| std::fs::read(p.join("report.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
    assert_eq!(report(&a)["seed"], 42);
}

#[test]
fn field_round_trips_through_ma_check() {
    let dir = TempDir::new().unwrap();
    let first = dir.path().join("first");
    let cfg = write_config(dir.path(), "c.json", r#"{"field": {"name": "paraboloid", "grid": {"nx": 9, "ny": 7, "origin": [-1, -1], "h": 0.25}}}"#);
    assert_eq!(run("ma-check", &cfg, &first, &[]).status.code(), Some(0));
    // feed the written field back in through the CSV path
    std::fs::copy(first.join("field.csv"), dir.path().join("field.csv")).unwrap();
    let cfg2 = write_config(dir.path(), "c2.json", r#"{"field": {"csv": "field.csv"}}"#);
    let second = dir.path().join("second");
    assert_eq!(run("ma-check", &cfg2, &second, &[]).status.code(), Some(0));
    assert_eq!(
        std::fs::read(first.join("field.csv")).unwrap(),
        std::fs::read(second.join("field.csv")).unwrap()
    );
    assert_eq!(report(&second)["values"]["source"], "csv");
}

#[test]
fn non_solution_fails_ma_check() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"field": {"name": "exp_sum"}}"#);
    assert_eq!(run("ma-check", &cfg, &dir.path().join("out"), &[]).status.code(), Some(1));
}

#[test]
fn geometry_commands_pass_with_defaults() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", "{}");
    for (cmd, artifact) in [("flat", "patch.csv"), ("tube", "tube.csv"), ("degenerate", "convergence.csv"), ("solve", "solution.csv")] {
        let out = dir.path().join(cmd);
        let o = run(cmd, &cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stdout));
        assert!(out.join(artifact).exists(), "{cmd}");
    }
    let csv = std::fs::read_to_string(dir.path().join("degenerate/convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("parameter,C0,C1,maxII"));
    assert_eq!(lines.count(), 3);
}

#[test]
fn horosphere_family_is_surface_like() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        r#"{"degenerate": {"family": {"kind": "TranslatedHorospheres", "c": [1.5, 1.2, 1.0]}}}"#,
    );
    let out = dir.path().join("out");
    assert_eq!(run("degenerate", &cfg, &out, &[]).status.code(), Some(0));
    assert_eq!(report(&out)["values"]["final_verdict"], "Surface-like");
}

#[test]
fn invalid_geometry_parameters_exit_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "c.json", r#"{"flat": {"surface": {"kind": "Equidistant", "d": -1}}}"#);
    assert_eq!(run("flat", &cfg, &dir.path().join("out"), &[]).status.code(), Some(2));
    let cfg = write_config(
        dir.path(),
        "d.json",
        r#"{"tube": {"geodesic": {"HalfCircle": {"center": [0, 0], "radius": -2, "direction": [1, 0]}}}}"#,
    );
    assert_eq!(run("tube", &cfg, &dir.path().join("out2"), &[]).status.code(), Some(2));
}
