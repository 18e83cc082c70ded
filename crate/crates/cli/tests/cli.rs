use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tmod_core::cinf::{lambda_theta, CinfJson};
use tmod_core::{Cinf, CinfNum, FieldParams};

fn tmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tmod")).args(args).output().expect("run tmod")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn report(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn num(ctx: &std::sync::Arc<Cinf>, v: &Value) -> CinfNum {
    let j: CinfJson = serde_json::from_value(v["value"].clone()).unwrap();
    CinfNum::from_json(ctx, &j).unwrap()
}

#[test]
fn verify_passes_every_criterion() {
    let out = tmod(&["verify", "--q", "2", "--prec", "200"]);
    let text = stdout(&out);
    assert_eq!(out.status.code(), Some(0), "{text}");
    for k in 1..=9 {
        assert!(text.contains(&format!("PASS criterion {k}:")), "{text}");
    }
    assert!(!text.contains("FAIL"));
}

#[test]
fn omega_constant_term_is_lambda_theta() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("omega.json");
    let out = tmod(&["omega", "--q", "3", "--prec", "120", "--terms", "6", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let rep = report(&path);
    let mut params = FieldParams::for_q(3).unwrap();
    params.prec = 120;
    let ctx = Cinf::new(params).unwrap();
    let lam = lambda_theta(&ctx).unwrap();
    assert!(num(&ctx, &rep["outputs"]["lambda_theta"]).identical(&lam));
    let coeffs = rep["outputs"]["disk_coefficients"].as_array().unwrap();
    assert_eq!(coeffs.len(), 6);
    let c0 = num(&ctx, &coeffs[0]);
    assert!(c0.distance(&lam).is_none_or(|d| d >= 60), "{c0}");
    assert!(rep["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
    assert_eq!(rep["config"]["field"]["prec"], 120);
}

#[test]
fn report_values_round_trip_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("period.json");
    let out = tmod(&["period", "--q", "3", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&path);
    let ctx = Cinf::new(FieldParams::for_q(3).unwrap()).unwrap();
    let pi = num(&ctx, &rep["outputs"]["period"]);
    assert_eq!(pi.render(), rep["outputs"]["period"]["text"].as_str().unwrap());
    assert_eq!(serde_json::to_value(pi.to_json()).unwrap(), rep["outputs"]["period"]["value"]);
    assert_eq!(rep["outputs"]["valuation"], "-3/2");
    for c in rep["checks"].as_array().unwrap() {
        assert!(c["residual"].as_i64().unwrap() >= c["threshold"].as_i64().unwrap());
    }
}

#[test]
fn tensor_power_has_one_jump() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("filt.json");
    let out = tmod(&["filtration", "--module", "carlitz_tensor:3", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&path);
    assert_eq!(rep["outputs"]["jumps"], serde_json::json!([3]));
    assert_eq!(rep["outputs"]["ranks"], serde_json::json!([0, 0, 0, 1]));
}

#[test]
fn reports_are_deterministic() {
    let a = stdout(&tmod(&["sf", "--q", "3", "--module", "carlitz_tensor:2", "--u", "0,1,1"]));
    let b = stdout(&tmod(&["sf", "--q", "3", "--module", "carlitz_tensor:2", "--u", "0,1,1"]));
    let strip = |s: &str| s.lines().filter(|l| !l.contains(" in ")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
    assert!(a.contains("PASS residue = lambda"));
}

#[test]
fn non_lattice_vector_fails_verification() {
    let out = tmod(&["sf", "--lambda", r#"[{"terms": [[0, [1]]], "prec": null}]"#]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("FAIL exp(lambda) = 0"));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let path = dir.path().join("out.json");
    std::fs::write(&cfg, r#"{"q": 2, "prec": 150, "module": {"type": "prolongation", "k": 1}}"#).unwrap();
    let out = tmod(&["residue", "--config", cfg.to_str().unwrap(), "--prec", "160", "--json", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    let rep = report(&path);
    assert_eq!(rep["config"]["field"]["prec"], 160);
    assert_eq!(rep["config"]["threshold"], 80);
    assert_eq!(rep["outputs"]["residues"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_and_config_errors_exit_with_two() {
    assert_eq!(tmod(&["omega", "--q", "6"]).status.code(), Some(2));
    assert_eq!(tmod(&["omega", "--q", "4", "--p-exp", "1"]).status.code(), Some(2));
    assert_eq!(tmod(&["omega", "--q", "3", "--ram", "3"]).status.code(), Some(2));
    assert_eq!(tmod(&["omega", "--prec", "0"]).status.code(), Some(2));
    assert_eq!(tmod(&["sf", "--u", "1"]).status.code(), Some(2));
    assert_eq!(tmod(&["sf", "--module", "nonsense"]).status.code(), Some(2));
    assert_eq!(tmod(&["nonsense"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"prec": 40, "threshold": 40}"#).unwrap();
    let out = tmod(&["omega", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("threshold"));
    std::fs::write(&cfg, r#"{"precision": 40}"#).unwrap();
    assert_eq!(tmod(&["omega", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}
