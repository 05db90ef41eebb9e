use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use triple_hecke::eigen::{generate_delta_coefficients, load_form};

fn run(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triple-hecke"))
        .args(args)
        .env("TRIPLE_HECKE_CACHE", cache)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn tau_file_has_one_line_per_coefficient() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    let res = run(dir.path(), &["tau", "--limit", "10", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&res), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 11);
    assert_eq!(lines[0], "weight=12");
    assert_eq!(lines[2], "2,-24");
}

#[test]
fn tau_round_trips_through_loader() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("t.csv");
    assert_eq!(code(&run(dir.path(), &["tau", "--limit", "100", "--out", out.to_str().unwrap()])), 0);
    assert_eq!(load_form(&out).unwrap(), generate_delta_coefficients(100).unwrap());
}

#[test]
fn zero_limit_is_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["tau", "--limit", "0"])), 2);
}

#[test]
fn missing_series_is_usage_error() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["partial-sums", "--limit", "1000"])), 2);
}

#[test]
fn identities_pass_at_acceptance_scale() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("id.json");
    let res = run(
        dir.path(),
        &["verify", "identities", "--prime-limit", "10000", "--tol", "1e-9", "--report", report.to_str().unwrap()],
    );
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let v = read_json(&report);
    assert_eq!(v["pass"], true);
    assert_eq!(v["identities"].as_array().unwrap().len(), 7);
}

#[test]
fn zero_tolerance_fails_with_report() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("id.json");
    let res = run(
        dir.path(),
        &["verify", "identities", "--prime-limit", "100", "--tol", "0", "--report", report.to_str().unwrap()],
    );
    assert_eq!(code(&res), 1);
    let v = read_json(&report);
    assert_eq!(v["pass"], false);
    for id in v["identities"].as_array().unwrap() {
        for key in ["identity", "tested", "max_dev", "worst_point", "pass"] {
            assert!(id.get(key).is_some(), "{key}");
        }
    }
}

#[test]
fn factorization_passes() {
    let dir = TempDir::new().unwrap();
    let res = run(
        dir.path(),
        &["verify", "factorization", "--prime-limit", "1000", "--depth", "10", "--tol", "1e-9"],
    );
    assert_eq!(code(&res), 0, "{}", String::from_utf8_lossy(&res.stderr));
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    assert_eq!(v["U"]["degree"], 64);
    assert_eq!(v["V"]["degree"], 36);
}

#[test]
fn partial_sums_report_schema() {
    let dir = TempDir::new().unwrap();
    let report = dir.path().join("r.json");
    let args = [
        "partial-sums", "--series", "triple-sq", "--limit", "100000", "--fit-degree", "4", "--report",
        report.to_str().unwrap(),
    ];
    assert_eq!(code(&run(dir.path(), &args)), 0);
    let first = std::fs::read(&report).unwrap();
    let v = read_json(&report);
    for key in ["series", "grid", "sums", "fit", "alt_fit", "residual_exponent"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["fit"]["degree"], 4);
    assert_eq!(v["fit"]["coeffs"].as_array().unwrap().len(), 5);
    assert_eq!(v["alt_fit"]["degree"], 3);
    assert_eq!(v["grid"].as_array().unwrap().len(), 40);
    assert!(v["residual_exponent"]["caveat"].is_string());

    assert_eq!(code(&run(dir.path(), &args)), 0);
    assert_eq!(std::fs::read(&report).unwrap(), first);
}

#[test]
fn sym2_csv() {
    let dir = TempDir::new().unwrap();
    let res = run(dir.path(), &["coeffs", "--series", "sym:2", "--limit", "1000"]);
    assert_eq!(code(&res), 0);
    let text = String::from_utf8(res.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1001);
    assert_eq!(lines[0], "n,value");
    let v: f64 = lines[2].strip_prefix("2,").unwrap().parse().unwrap();
    let lambda2 = -24.0 / 2f64.powf(5.5);
    assert!((v - (lambda2 * lambda2 - 1.0)).abs() < 1e-15);
}

#[test]
fn euler_eval_domain_and_value() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["euler-eval", "--factor", "U", "--s", "0.5", "--prime-limit", "100"])), 2);
    let res = run(dir.path(), &["euler-eval", "--factor", "zeta", "--s", "2", "--prime-limit", "100000"]);
    assert_eq!(code(&res), 0);
    let v: Value = serde_json::from_slice(&res.stdout).unwrap();
    let value = v["value"].as_f64().unwrap();
    assert!((value - std::f64::consts::PI.powi(2) / 6.0).abs() < 1e-4);
}

#[test]
fn unreadable_form_is_io_error() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("absent.txt");
    let res = run(
        dir.path(),
        &["coeffs", "--form", missing.to_str().unwrap(), "--series", "triple", "--limit", "10"],
    );
    assert_eq!(code(&res), 3);
}

#[test]
fn coefficient_file_form() {
    let dir = TempDir::new().unwrap();
    let file = dir.path().join("f.txt");
    generate_delta_coefficients(50).unwrap().save(&file).unwrap();
    let from_file = run(dir.path(), &["coeffs", "--form", file.to_str().unwrap(), "--series", "triple", "--limit", "50"]);
    let builtin = run(dir.path(), &["coeffs", "--series", "triple", "--limit", "50"]);
    assert_eq!(code(&from_file), 0);
    assert_eq!(from_file.stdout, builtin.stdout);
    let short = run(dir.path(), &["coeffs", "--form", file.to_str().unwrap(), "--series", "triple", "--limit", "60"]);
    assert_eq!(code(&short), 2);
}

#[test]
fn cache_is_reused_for_smaller_limits() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&run(dir.path(), &["tau", "--limit", "500", "--out", "/dev/null"])), 0);
    assert!(dir.path().join("tau-500.txt").exists());
    let res = run(dir.path(), &["tau", "--limit", "20"]);
    assert_eq!(code(&res), 0);
    assert!(!dir.path().join("tau-20.txt").exists());
    assert_eq!(String::from_utf8(res.stdout).unwrap().lines().count(), 21);
}

#[test]
fn corrupt_cache_is_regenerated() {
    let dir = TempDir::new().unwrap();
    std::fs::write(dir.path().join("tau-100.txt"), "weight=12\n1,1\n2,oops\n").unwrap();
    let res = run(dir.path(), &["tau", "--limit", "30"]);
    assert_eq!(code(&res), 0);
    assert!(String::from_utf8_lossy(&res.stderr).contains("warning"));
    assert_eq!(String::from_utf8(res.stdout).unwrap().lines().nth(3), Some("3,252"));
}
