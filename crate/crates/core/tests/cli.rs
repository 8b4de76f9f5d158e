use std::fs;
use std::path::Path;
use std::process::Command;

use num_bigint::BigInt;
use serde_json::Value;

use padic_paths::cli::{run_command, Outcome, CACHE_ENV};

fn run(args: &[&str]) -> Outcome {
    run_command(std::iter::once("padic-paths").chain(args.iter().copied()))
}

fn json(o: &Outcome) -> Value {
    assert_eq!(o.code, 0, "{}", o.stderr);
    serde_json::from_str(&o.stdout).unwrap()
}

fn int(v: &Value) -> i64 {
    v.as_str().map(|s| s.parse().unwrap()).or_else(|| v.as_i64()).unwrap()
}

// every serialized p-adic number: unit below p^(n_abs - v)
fn check_digits(v: &Value, seen: &mut usize) {
    match v {
        Value::Object(m) if m.contains_key("u") && m.contains_key("n_abs") => {
            *seen += 1;
            if m["n_abs"] == "inf" {
                assert_eq!(m["u"], "0");
                return;
            }
            let p: BigInt = m["p"].as_str().unwrap().parse().unwrap();
            let u: BigInt = m["u"].as_str().unwrap().parse().unwrap();
            let digits = int(&m["n_abs"]) - int(&m["v"]);
            assert!(digits >= 0 || u == BigInt::from(0), "{v}");
            assert!(u < p.pow(digits.max(0) as u32), "{v}");
        }
        Value::Object(m) => m.values().for_each(|x| check_digits(x, seen)),
        Value::Array(a) => a.iter().for_each(|x| check_digits(x, seen)),
        _ => {}
    }
}

fn files(dir: &Path) -> Vec<String> {
    let mut out: Vec<String> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    out.sort();
    out
}

#[test]
fn zeta_two_vanishes_at_five() {
    let o = run(&["mzv", "--prime", "5", "--indices", "2", "--weight", "4", "--prec", "12"]);
    let j = json(&o);
    assert_eq!(j["indices"], serde_json::json!([2]));
    assert_eq!(j["value"]["u"], "0");
    assert!(int(&j["value"]["n_abs"]) >= 12);
    assert_eq!(int(&j["threshold"]), 2);
    let m = &j["margin"];
    assert!(m == "infinite" || m.get("finite").map_or(false, |k| k.as_i64().unwrap() >= 0), "{m}");
}

#[test]
fn weight_beyond_truncation_is_rejected() {
    let o = run(&["mzv", "--prime", "5", "--indices", "2", "--weight", "1"]);
    assert_eq!(o.code, 1);
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());
}

#[test]
fn bad_input_exits_1() {
    for args in [
        vec!["associator", "--prime", "4"],
        vec!["associator", "--prime", "5", "--prec", "3"],
        vec!["associator", "--prime", "5", "--waypoint", "omega(x)"],
        vec!["mzv", "--indices", "0,2"],
        vec!["transport", "--from", "tan(2)", "--to", "1/5", "--prime", "5", "--weight", "2"],
        vec!["frobnicate"],
    ] {
        assert_eq!(run(&args).code, 1, "{args:?}");
    }
}

#[test]
fn integrality_at_three() {
    let o = run(&["verify-integrality", "--prime", "3", "--weight", "4"]);
    let j = json(&o);
    assert_eq!(j["passed"], true);
    let lines = j["lines"].as_array().unwrap();
    assert_eq!(lines.len(), 1 + 2 + 4 + 8 + 16);
    let csv = run(&["verify-integrality", "--prime", "3", "--weight", "4", "--out", "csv"]);
    assert_eq!(csv.code, 0);
    let mut rows = csv.stdout.lines();
    assert_eq!(rows.next(), Some("word,weight,valuation,n_abs,threshold,margin"));
    let rows: Vec<&str> = rows.collect();
    assert_eq!(rows.len(), lines.len());
    for r in rows {
        let margin = r.rsplit(',').next().unwrap();
        assert!(margin == "inf" || margin.parse::<i64>().unwrap() >= 0, "{r}");
    }
}

#[test]
fn reports_stay_within_absolute_precision() {
    let mut seen = 0;
    check_digits(&json(&run(&["associator", "--prime", "3", "--weight", "4", "--prec", "8"])), &mut seen);
    check_digits(&json(&run(&["transport", "--prime", "5", "--weight", "3", "--prec", "8", "--from", "tan(0)", "--to", "5/2"])), &mut seen);
    check_digits(&json(&run(&["transport", "--prime", "5", "--weight", "3", "--prec", "8", "--from", "tan(0)", "--to", "omega(2)"])), &mut seen);
    assert!(seen > 40);
}

#[test]
fn transport_methods() {
    let tiny = json(&run(&["transport", "--prime", "5", "--weight", "2", "--prec", "8", "--from", "tan(0)", "--to", "5"]));
    assert_eq!(tiny["method"], "tiny");
    let far = json(&run(&["transport", "--prime", "5", "--weight", "2", "--prec", "8", "--from", "tan(0)", "--to", "tan(1)"]));
    assert_eq!(far["method"], "frobenius");
    let phi = json(&run(&["associator", "--prime", "5", "--weight", "2", "--prec", "8"]));
    for (w, c) in far["coefficients"].as_object().unwrap() {
        let d = &phi["coefficients"][w];
        assert_eq!(c["u"], d["u"], "{w}");
        assert_eq!(c["v"], d["v"], "{w}");
    }
    assert_eq!(run(&["transport", "--prime", "5", "--from", "tan(0)", "--to", "5", "--out", "csv"]).code, 1);
}

#[test]
fn cache_round_trip_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["associator", "--prime", "3", "--weight", "3", "--prec", "8", "--cache-dir", d];
    let first = run(&args);
    assert_eq!(first.code, 0);
    let names = files(dir.path());
    assert_eq!(names.len(), 1, "{names:?}");
    let cached = fs::read_to_string(dir.path().join(&names[0])).unwrap();
    let second = run(&args);
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(cached.trim_end(), first.stdout.trim_end());

    // the recomputation matches the cached bytes
    fs::remove_file(dir.path().join(&names[0])).unwrap();
    let third = run(&args);
    assert_eq!(first.stdout, third.stdout);
    assert_eq!(files(dir.path()), names);

    // mzv reuses the associator at the same settings
    let z = run(&["mzv", "--prime", "3", "--indices", "3", "--weight", "3", "--prec", "8", "--cache-dir", d]);
    assert_eq!(z.code, 0);
    assert_eq!(files(dir.path()), names);
}

#[test]
fn tampered_cache_fails_integrality() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["verify-integrality", "--prime", "3", "--weight", "2", "--prec", "6", "--cache-dir", d];
    assert_eq!(run(&args).code, 0);
    let name = &files(dir.path())[0];
    let path = dir.path().join(name);
    let mut j: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    j["coefficients"]["AB"] = serde_json::json!({"p": "3", "v": "-2", "u": "1", "n_abs": "6"});
    fs::write(&path, serde_json::to_string_pretty(&j).unwrap()).unwrap();
    let o = run(&args);
    assert_eq!(o.code, 3);
    let r: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(r["passed"], false);
}

#[test]
fn cache_env_overrides_flag() {
    let flag = tempfile::tempdir().unwrap();
    let env = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_padic-paths"))
        .args(["associator", "--prime", "3", "--weight", "2", "--prec", "6", "--cache-dir"])
        .arg(flag.path())
        .env(CACHE_ENV, env.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(files(flag.path()).is_empty());
    assert_eq!(files(env.path()).len(), 1);
    let j: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["p"], 3);
}

#[test]
fn custom_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("divisor.json");
    fs::write(&cfg, r#"{"p": 5, "N": 2, "points": ["inf", "0", "1", "-1"]}"#).unwrap();
    let c = cfg.to_str().unwrap();
    let o = run(&["verify-integrality", "--config", c, "--prec", "6"]);
    assert_eq!(o.code, 0, "{}", o.stderr);
    let j = json(&run(&["associator", "--config", c, "--prec", "6"]));
    assert_eq!(j["points"].as_array().unwrap().len(), 4);
    assert_eq!(j["coefficients"].as_object().unwrap().len(), 1 + 3 + 9);

    let many = dir.path().join("many.json");
    let pts: Vec<String> = std::iter::once("inf".to_string()).chain((0..8).map(|i| i.to_string())).collect();
    fs::write(&many, serde_json::json!({"p": 11, "N": 2, "points": pts}).to_string()).unwrap();
    assert_eq!(run(&["associator", "--config", many.to_str().unwrap()]).code, 1);
    assert_eq!(run(&["associator", "--config", dir.path().join("missing.json").to_str().unwrap()]).code, 1);
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest"]);
    assert_eq!(o.code, 0, "{}", o.stdout);
    assert!(o.stdout.lines().count() >= 8);
    assert!(o.stdout.lines().all(|l| l.starts_with("ok")), "{}", o.stdout);
}
