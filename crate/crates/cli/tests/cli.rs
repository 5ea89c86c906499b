use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn holeplane(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holeplane"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(output: &Output) -> serde_json::Value {
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    serde_json::from_slice(&output.stdout).expect("stdout is json")
}

#[test]
fn help_lists_commands_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let top = String::from_utf8(holeplane(dir.path(), &["--help"]).stdout).unwrap();
    for word in ["kernel", "mesh", "solve", "experiment", "--threads", "--out", "--seed"] {
        assert!(top.contains(word), "missing {word}");
    }
    let kernel = String::from_utf8(holeplane(dir.path(), &["kernel", "--help"]).stdout).unwrap();
    for flag in ["--y", "--x", "--r", "--p", "--eps", "--path", "--neumann"] {
        assert!(kernel.contains(flag), "missing {flag}");
    }
    let experiments =
        String::from_utf8(holeplane(dir.path(), &["experiment", "--help"]).stdout).unwrap();
    for name in ["bump", "dip", "accuracy-map", "cost-curve"] {
        assert!(experiments.contains(name), "missing {name}");
    }
}

#[test]
fn kernel_vanishes_on_the_plane_and_paths_agree() {
    let dir = tempfile::tempdir().unwrap();
    let on_plane = json(&holeplane(dir.path(), &["kernel", "--y", "0,0,0", "--x", "0.2,0,0.3", "--r", "1"]));
    assert_eq!(on_plane["value"], 0.0);

    let pair = ["kernel", "--y", "0.3,0,0.2", "--x", "0.1,0.2,0.4", "--p", "24"];
    let series = json(&holeplane(dir.path(), &[&pair[..], &["--path", "series"]].concat()));
    let integral = json(&holeplane(dir.path(), &[&pair[..], &["--path", "integral"]].concat()));
    let a = series["value"].as_f64().unwrap();
    let b = integral["value"].as_f64().unwrap();
    let bound = series["relative_error_bound"].as_f64().unwrap();
    assert!((a - b).abs() <= bound * b.abs(), "{a} vs {b}, bound {bound}");

    let neumann = json(&holeplane(
        dir.path(),
        &["kernel", "--y", "0.1,0.2,0.4", "--x", "0.3,0,0.2", "--neumann", "--path", "integral"],
    ));
    assert_eq!(neumann["value"].as_f64().unwrap(), -b);
}

#[test]
fn exit_codes_separate_usage_from_numeric_failures() {
    let dir = tempfile::tempdir().unwrap();
    let malformed = holeplane(dir.path(), &["kernel", "--y", "0.3,zero,0", "--x", "0,0,0.1"]);
    assert_eq!(malformed.status.code(), Some(1));
    let missing = holeplane(dir.path(), &["solve", "--mesh", "no-such-file.txt", "--source", "0,0,2"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("no-such-file.txt"));
    let outside = holeplane(dir.path(), &["kernel", "--y", "0,0,2", "--x", "0,0,0.1", "--path", "series"]);
    assert_eq!(outside.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&outside.stderr).contains("domain error"));
}

#[test]
fn dip_mesh_and_solve_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = json(&holeplane(dir.path(), &["mesh", "--kind", "dip", "--re", "1.124", "--edge", "0.25"]));
    assert!((mesh["delta"].as_f64().unwrap() - 0.124).abs() < 1e-12);
    assert_eq!(mesh["ground"], 0);
    let mesh_file = dir.path().join("mesh-dip.txt");
    assert!(mesh_file.exists());

    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let summary = json(&holeplane(
            &out,
            &["solve", "--mesh", mesh_file.to_str().unwrap(), "--source", "0,0,0.5", "--grid-spacing", "0.1"],
        ));
        assert!(summary["relative_residual"].as_f64().unwrap() < 1e-10);
        outputs.push((
            fs::read(out.join("solve-solution.csv")).unwrap(),
            fs::read(out.join("solve-field.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn output_directory_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_holeplane"))
        .env("HOLEPLANE_OUT", dir.path())
        .args(["mesh", "--kind", "bump", "--edge", "0.5"])
        .output()
        .unwrap();
    assert!(status.status.success());
    assert!(dir.path().join("mesh-bump.txt").exists());
}

#[test]
fn coarse_bump_experiment_orders_the_methods() {
    let dir = tempfile::tempdir().unwrap();
    let report = json(&holeplane(
        dir.path(),
        &["experiment", "bump", "--h", "2", "--eps", "1e-4", "--edge", "0.2", "--grid-spacing", "0.1"],
    ));
    let eps2 = |method: &str| {
        report["runs"]
            .as_array()
            .unwrap()
            .iter()
            .find(|r| r["method"] == method)
            .unwrap()["eps2"]
            .as_f64()
            .unwrap()
    };
    assert!(eps2("extended") < 1e-2);
    assert!(eps2("truncated") >= 5.0 * eps2("extended"));
    assert!(dir.path().join("bump-seed0.csv").exists());
    assert!(dir.path().join("bump-seed0.json").exists());
}

#[test]
fn accuracy_map_is_deterministic_for_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--seed", "5", "experiment", "accuracy-map", "--ratios", "2", "--max-p", "6"];
    let first = holeplane(dir.path(), &args);
    assert!(first.status.success());
    let a = fs::read(dir.path().join("accuracy-map-seed5.csv")).unwrap();
    assert!(holeplane(dir.path(), &args).status.success());
    let b = fs::read(dir.path().join("accuracy-map-seed5.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 4);
}
