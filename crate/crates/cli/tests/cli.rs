use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use laguerre_core::config::SweepConfig;

fn laguerre(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_laguerre")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn checked_in_defaults_match_the_built_in_ones() {
    let text = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../config/defaults.toml")).unwrap();
    let cfg: SweepConfig = toml::from_str(&text).unwrap();
    assert_eq!(cfg, SweepConfig::default());
}

#[test]
fn range_of_the_riesz_transform() {
    let o = laguerre(&["range", "--nu", "-0.75", "--op", "riesz", "--j", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("(1.3333333333333333, inf)"), "{out}");
    assert!(out.contains("A_{0.75·p}"), "{out}");
}

#[test]
fn range_of_the_maximal_function() {
    let o = laguerre(&["range", "--nu", "-0.75", "--op", "maximal"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("(1.3333333333333333, 4)"));
    // only the one-dimensional statement is available
    let o = laguerre(&["range", "--nu", "-0.75,0.2", "--op", "maximal"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("unsupported claim"));
}

#[test]
fn out_of_range_axis_is_a_usage_error() {
    let o = laguerre(&["range", "--nu", "-0.75", "--op", "riesz", "--j", "2"]);
    assert_eq!(o.status.code(), Some(64));
}

#[test]
fn eval_phi_matches_the_closed_form() {
    // φ_0^ν(x) = sqrt(2/Γ(ν+1)) x^{ν+1/2} e^{-x²/2}, and Γ(1) = 1 at ν = 0
    let o = laguerre(&["eval-phi", "--k", "0", "--nu", "0", "--x", "1.3"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = laguerre(&["--output", d, "eval-phi", "--k", "0", "--nu", "0", "--x", "1.3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&dir.path().join("eval-phi.json"));
    let got = v["report"]["value"].as_f64().unwrap();
    let want = 2f64.sqrt() * 1.3f64.sqrt() * (-1.3f64 * 1.3 / 2.0).exp();
    assert!((got - want).abs() < 1e-14 * want);
}

#[test]
fn heat_kernel_is_symmetric() {
    let dir = tempfile::tempdir().unwrap();
    let value = |x: &str, y: &str| {
        let sub = dir.path().join(format!("{x}-{y}"));
        let o = laguerre(&["--output", sub.to_str().unwrap(), "heat-kernel", "--nu", "-0.75", "--t", "0.3", "--x", x, "--y", y]);
        assert_eq!(o.status.code(), Some(0));
        json(&sub.join("heat-kernel.json"))["report"]["value"].as_f64().unwrap()
    };
    let (a, b) = (value("0.4", "1.7"), value("1.7", "0.4"));
    assert!(a > 0.0 && (a - b).abs() < 1e-13 * a);
}

#[test]
fn verify_bounds_for_case_three() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = laguerre(&["--output", d, "verify-bounds", "--claim", "prop31iii", "--nu", "-0.75"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("verify-bounds.json"));
    let r = &v["report"][0];
    assert_eq!(r["claim_id"], "prop31iii[nu=-0.75]");
    assert_eq!(r["violated"], false);
    assert!(r["best_constant"].as_f64().unwrap().is_finite());
    let csv = fs::read_to_string(dir.path().join("verify-bounds-bounds.csv")).unwrap();
    assert!(csv.starts_with("claim_id,best_c,"));
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn claim_outside_its_case_is_rejected() {
    let o = laguerre(&["verify-bounds", "--claim", "prop31iii", "--nu", "0.3"]);
    assert_eq!(o.status.code(), Some(64));
    let o = laguerre(&["verify-bounds", "--claim", "no-such-claim"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("prop31iii"));
}

#[test]
fn intertwining_identities_hold() {
    let o = laguerre(&["verify-identities", "--set", "intertwining"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("[PASS]  4 intertwining"), "{out}");
    assert!(!out.contains("FAIL"));
}

#[test]
fn runs_are_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let o = laguerre(&["--output", d.path().to_str().unwrap(), "verify-identities", "--set", "derivatives"]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["verify-identities.json", "verify-identities-rows.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn tightened_tolerance_yields_a_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("strict.toml");
    fs::write(&cfg, "tol_orthonormality = 1e-20\northonormality_kmax = 4\n").unwrap();
    let out = dir.path().join("reports");
    let o = laguerre(&["--config", cfg.to_str().unwrap(), "--output", out.to_str().unwrap(), "verify-identities", "--set", "orthonormality"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("violation: claim criterion-1"), "{}", stderr(&o));
    let v = json(&out.join("verify-identities.json"));
    let cert = &v["certificates"][0];
    assert_eq!(cert["claim_id"], "criterion-1");
    assert!(cert["ratio"].as_f64().unwrap() > 1.0);
    assert!(cert["worst_point"].as_str().unwrap().starts_with("nu="));
}

#[test]
fn bad_inputs_exit_with_usage_status() {
    assert_eq!(laguerre(&["no-such-command"]).status.code(), Some(64));
    assert_eq!(laguerre(&["eval-phi", "--k", "0", "--nu", "-1.5", "--x", "1"]).status.code(), Some(64));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "no_such_key = 3\n").unwrap();
    let o = laguerre(&["--config", cfg.to_str().unwrap(), "range", "--nu", "0", "--op", "square-g"]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("invalid config"));
    let o = Command::new(env!("CARGO_BIN_EXE_laguerre"))
        .args(["range", "--nu", "0", "--op", "square-g"])
        .env("LAGUERRE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));
    assert_eq!(laguerre(&["--help"]).status.code(), Some(0));
}

#[test]
fn single_weight_check_agrees_with_the_closed_form() {
    let o = laguerre(&["weight-check", "--sigma", "0.5", "--p", "2", "--q", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("A_2 member = true"));
    // x^{1.5} is outside A_2 in one dimension, and the constants grow
    let o = laguerre(&["weight-check", "--sigma", "1.5", "--p", "2", "--q", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    assert!(stdout(&o).contains("A_2 member = false"));
}

#[test]
fn riesz_closed_form_through_both_routes() {
    let o = laguerre(&["riesz", "--nu", "-0.5", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("quadrature") && out.contains("spectral"));
}
