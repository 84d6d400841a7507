//! The binary's exit codes, report determinism and output directory.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dispersive-lab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(args: &[&str]) -> i32 {
    lab(args).status.code().expect("exited normally")
}

fn stdout(args: &[&str]) -> String {
    let out = lab(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    serde_json::from_str(&stdout(&full)).unwrap()
}

#[test]
fn success_is_zero() {
    assert_eq!(code(&["regime"]), 0);
    assert_eq!(code(&["fuse", "--list"]), 0);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn usage_errors_are_one() {
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["teleport"]), 1);
    assert_eq!(code(&["regime", "--preset", "nowhere"]), 1);
    assert_eq!(code(&["regime", "--preset", "custom"]), 1);
    assert_eq!(code(&["fuse", "--recipe", "fig99"]), 1);
    assert_eq!(code(&["cz", "--model", "eff_cavity", "--engine", "spectral"]), 1);
    assert_eq!(code(&["sweep", "--param", "omega", "--metric", "fidelity"]), 1);
    assert_eq!(code(&["sweep", "--param", "n-max", "--values", "1.5", "--metric", "fidelity"]), 1);
    assert_eq!(code(&["regime", "--format", "dot"]), 1);
    assert_eq!(code(&["regime", "--config", "/nonexistent/lab.toml", "--preset", "custom"]), 1);
}

#[test]
fn physics_failures_are_two() {
    let out = lab(&["regime", "--min-ratio", "25"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    // Full model outside the dispersive regime.
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("near.toml");
    std::fs::write(&cfg, "[params]\nn_atoms = 2\ng = 1.0\nomega = 1.0\ndelta1 = 3.0\ndelta2 = 3.5\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&["regime", "--preset", "custom", "--config", cfg]), 2);
    assert_eq!(
        code(&["cz", "--preset", "custom", "--config", cfg, "--engine", "spectral", "--n-max", "2"]),
        2
    );
}

#[test]
fn capped_search_is_inconclusive() {
    assert_eq!(code(&["fuse", "--recipe", "fig3b", "--orbit-cap", "1"]), 3);
}

#[test]
fn json_reports_are_byte_identical() {
    for args in [
        &["regime", "--format", "json"][..],
        &["budget", "--engine", "spectral", "--samples", "16", "--format", "json"][..],
        &["cz", "--model", "eff_diag", "--format", "json"][..],
        &["fuse", "--recipe", "fig2b", "--format", "json"][..],
    ] {
        assert_eq!(stdout(args), stdout(args), "{args:?}");
    }
}

#[test]
fn json_envelope() {
    let v = json(&["regime"]);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "regime");
    let v = json(&["cz", "--model", "eff_diag"]);
    assert!((v["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-9, "{v}");
    assert_eq!(v["basis"].as_array().unwrap().len(), 4);
}

#[test]
fn budget_reports_both_units() {
    let v = json(&["budget", "--engine", "spectral", "--samples", "16"]);
    let nominal = &v["nominal"];
    assert_eq!(nominal["t_r_eff"].as_f64(), Some(7.6e-5), "{v}");
    assert_eq!(nominal["t_c_eff"].as_f64(), Some(7.6e-5), "{v}");
    assert!(v["measured"]["headroom"].as_f64().unwrap() > 1.0);
    let ion = stdout(&["budget", "--preset", "ion"]);
    assert!(ion.contains("31.8"), "{ion}");
}

#[test]
fn out_dir_gets_report_and_companions() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout(&["regime", "--out-dir", d]);
    stdout(&["fuse", "--recipe", "fig3c", "--out-dir", d]);
    for name in ["report.json", "regime.tsv", "final.dot", "target.dot", "final.adj"] {
        assert!(Path::new(d).join(name).is_file(), "{name}");
    }
    let dot = std::fs::read_to_string(dir.path().join("target.dot")).unwrap();
    assert!(dot.starts_with("graph") && dot.matches("--").count() == 4, "{dot}");
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["command"], "fuse");
}

#[test]
fn cz_timeseries_has_one_row_per_sample() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    stdout(&["cz", "--model", "eff_diag", "--samples", "8", "--out-dir", d]);
    let tsv = std::fs::read_to_string(dir.path().join("timeseries.tsv")).unwrap();
    let lines: Vec<&str> = tsv.lines().collect();
    assert!(lines[0].starts_with("t\tt_seconds\tphi"), "{}", lines[0]);
    assert_eq!(lines.len(), 1 + 8);
    let width = lines[0].split('\t').count();
    assert!(lines.iter().all(|l| l.split('\t').count() == width));
}

#[test]
fn plan_file_and_sweep_section() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.toml");
    std::fs::write(
        &plan,
        "[plan]\nname = \"triangle\"\nn_qubits = 3\nsteps = [\"entangle 0 1 2\"]\ntarget = \"star 3\"\n",
    )
    .unwrap();
    let v = json(&["fuse", "--plan", plan.to_str().unwrap()]);
    assert_eq!(v["command"], "fuse");
    assert_eq!(v["status"], "equivalent", "{v}");

    let sweep = dir.path().join("sweep.toml");
    std::fs::write(&sweep, "[sweep]\nparam = \"t\"\nrange = \"0:gate:5\"\nmetric = \"phase\"\n").unwrap();
    let out = stdout(&[
        "sweep", "--config", sweep.to_str().unwrap(), "--model", "eff_diag", "--format", "tsv",
    ]);
    assert_eq!(out.lines().count(), 1 + 5, "{out}");
}
