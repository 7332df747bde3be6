//! The binary end to end: exit codes, report schema, saved chains, trajectories.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ellchain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ellchain"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn assert_schema(r: &Value) {
    assert!(r["command"].is_string());
    assert!(r["params"].is_object());
    for c in r["checks"].as_array().unwrap() {
        for key in ["name", "value", "tolerance", "pass", "ref"] {
            assert!(c.get(key).is_some(), "entry lacks {key}: {c}");
        }
    }
}

#[test]
fn seed_equilibrium_report() {
    let out = ellchain(&["equilibrium", "--N", "4", "--B-word", ""]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&out);
    assert_schema(&r);
    assert_eq!(r["pass"], true);
    let x = r["equilibrium"]["x"].as_array().unwrap();
    assert_eq!(x.len(), 4);
    // complex numbers are [re, im]
    assert_eq!(x[0].as_array().unwrap().len(), 2);
    assert_eq!(r["params"]["command"]["equilibrium"]["family"]["N"], 4);
}

#[test]
fn identical_runs_give_identical_reports() {
    let a = ellchain(&["theta-check", "--samples", "5", "--seed", "11"]);
    let b = ellchain(&["theta-check", "--samples", "5", "--seed", "11"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn unknown_flag_is_a_usage_error_without_report() {
    let out = ellchain(&["theta-check", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let out = ellchain(&["equilibrium", "--B-word", "SX"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn residual_breach_exits_one() {
    let out = ellchain(&["theta-check", "--samples", "3", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(report(&out)["pass"], false);
}

#[test]
fn pole_exits_three_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let out = ellchain(&[
        "hybrid",
        "evolve",
        "--N",
        "3",
        "--x0",
        "0.1,0.1,0.5",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(report(&out)["error"].as_str().unwrap().contains("pole"));
}

#[test]
fn chain_build_verify_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().join("face");
    let ds = d.to_str().unwrap();
    let out = ellchain(&[
        "chain", "build", "--kind", "face", "--N", "4", "--r", "2", "--B-word", "S", "--format",
        "bin", "--out", ds,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&out);
    assert_schema(&r);
    let comm = r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["ref"] == "chain-integrability")
        .unwrap();
    assert!(comm["value"].as_f64().unwrap() < 1e-9);
    for f in ["chain.json", "report.json", "h_1.bin", "h_-3.bin"] {
        assert!(Path::new(ds).join(f).exists(), "{f} missing");
    }

    let out = ellchain(&["chain", "verify", "--dir", ds]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["pass"], true);

    let out = ellchain(&[
        "chain", "spectrum", "--dir", ds, "--n", "1,-1", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 16);
}

#[test]
fn json_chain_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let ds = dir.path().join("v").to_str().unwrap().to_string();
    let out = ellchain(&["chain", "build", "--N", "3", "--B-word", "TS", "--out", &ds]);
    assert_eq!(out.status.code(), Some(0));
    assert!(Path::new(&ds).join("hamiltonians.json").exists());
    let out = ellchain(&["chain", "verify", "--dir", &ds]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn hybrid_trajectory_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let out = ellchain(&[
        "hybrid",
        "evolve",
        "--kind",
        "vertex",
        "--N",
        "3",
        "--B-word",
        "S",
        "--t-end",
        "0.2",
        "--sample-every",
        "20",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(&out);
    assert!(r["checks"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["ref"] == "liouville-integrability"));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header[0], "t");
    assert_eq!(header.len(), 1 + 4 * 3 + 4);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 11);
    let last_t: f64 = rows[10].split(',').next().unwrap().parse().unwrap();
    assert!((last_t - 0.2).abs() < 1e-15);
}

#[test]
fn hybrid_needs_an_output_path() {
    assert_eq!(
        ellchain(&["hybrid", "evolve", "--N", "3"]).status.code(),
        Some(2)
    );
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "N = 5\nB-word = S\nomega = 0.2+2i\n").unwrap();
    let out = ellchain(&["equilibrium", "--config", cfg.to_str().unwrap(), "--N", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["params"]["command"]["equilibrium"]["family"]["N"], 3);
    assert_eq!(r["equilibrium"]["B-word"], "S");
}

#[test]
fn ops_verify_pairs() {
    let out = ellchain(&[
        "ops-verify",
        "--case",
        "vertex",
        "--N",
        "3",
        "--pairs",
        "1,2;1,-1",
        "--samples",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = ellchain(&[
        "ops-verify",
        "--case",
        "scalar",
        "--N",
        "3",
        "--pairs",
        "1,4",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn report_to_file_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    let out = ellchain(&[
        "rmatrix-verify",
        "--kind",
        "face",
        "--samples",
        "3",
        "--format",
        "csv",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("name,value,tolerance,bound,pass,blocking,ref"));
}
