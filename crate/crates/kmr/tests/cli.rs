use std::process::Command;

use serde_json::Value;
use sha2::{Digest, Sha256};

use kmr::cli::run;
use kmr_core::weierstrass::{normalize_mu, t1_quadrature, t3_closed_form, SurfaceParams};

mod common;
use common::validate;

fn kmr(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(std::iter::once("kmr").chain(args.iter().copied()), &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = kmr(args);
    (code, serde_json::from_str(&out).unwrap_or_else(|e| panic!("{e}: {out} {err}")))
}

fn schema(name: &str) -> Value {
    let path = format!("{}/schemas/{name}.schema.json", env!("CARGO_MANIFEST_DIR"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn num(v: &Value, path: &[&str]) -> f64 {
    path.iter().fold(v, |v, k| &v[*k]).as_f64().unwrap()
}

#[test]
fn params_report_matches_the_fixture_and_oracles() {
    let (code, v) = json(&["params", "--theta", "1.0", "--alpha", "0.7"]);
    assert_eq!(code, 0);
    validate(&v, &schema("params")).unwrap();
    let path = format!("{}/tests/fixtures/params_theta1_alpha0.7.json", env!("CARGO_MANIFEST_DIR"));
    let fixture: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    common::assert_close(&v, &fixture, 1e-12, 1e-8);

    let p = SurfaceParams::new(1.0, 0.7).unwrap();
    let t1 = t1_quadrature(&p).unwrap();
    let t3 = t3_closed_form(&p);
    let tol = |x: f64| 1e-8 * (1.0 + x.abs());
    assert!((num(&fixture, &["mu"]) - normalize_mu(1.0, 0.7)).abs() < tol(1.0));
    assert!((fixture["T"][0].as_f64().unwrap().abs() - t1.abs()).abs() < tol(t1), "{}", fixture["T"]);
    assert!((fixture["T"][2].as_f64().unwrap().abs() - t3.abs()).abs() < tol(t3));
    assert!((num(&fixture, &["h"]) - 0.25 * t3.abs()).abs() < tol(1.0));
    assert!((num(&fixture, &["lambda"]) - 1.0 / (0.5f64).tan()).abs() < tol(1.0));
    assert_eq!(fixture["feasible"], Value::Bool(true));
    assert_eq!(fixture["invariants"]["ok"], Value::Bool(true));
}

#[test]
fn params_mu_on_the_seam() {
    let (code, v) = json(&[
        "params",
        "--theta",
        &std::f64::consts::FRAC_PI_3.to_string(),
        "--alpha",
        &std::f64::consts::FRAC_PI_2.to_string(),
    ]);
    assert_eq!(code, 0);
    let expected = 4.0 / (3f64.sqrt() * std::f64::consts::PI);
    assert!((num(&v, &["mu"]) - expected).abs() < 1e-8);
}

#[test]
fn text_format_lists_the_fields() {
    let (code, out, _) = kmr(&["params", "--theta", "1.0", "--alpha", "0.7", "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.lines().any(|l| l == "mu: 0.579043867"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("invariants.ok: true")));
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        &["params", "--theta", "1.7", "--alpha", "0"][..],
        &["params", "--theta", "1.0"],
        &["params", "--theta", "x", "--alpha", "0"],
        &["mesh", "--theta", "1.0", "--alpha", "0.7", "--res", "8"],
        &["mesh", "--theta", "1.0", "--alpha", "0.7", "--format", "json"],
        &["mesh", "--theta", "1.0", "--alpha", "0.7", "--eps-end", "-1"],
        &["mesh", "--theta", "1.0", "--alpha", "0.7", "--eps-end", "5"],
        &["params", "--theta", "1.0", "--alpha", "0.7", "--format", "obj"],
        &["solve", "--h", "0.4", "--a", "0.35", "--tol", "0"],
        &["limits", "--regime", "helicoid", "--alpha-inf", "0.3"],
        &["limits", "--regime", "scherk2p", "--alpha-inf", "0"],
        &["frobnicate"],
    ] {
        let (code, out, err) = kmr(args);
        assert_eq!(code, 1, "{args:?}");
        assert!(out.is_empty() && !err.is_empty(), "{args:?}");
    }
    let (code, out, _) = kmr(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("verify"));
}

#[test]
fn solve_exit_codes_and_report() {
    let (code, out, err) = kmr(&["solve", "--h", "0.3", "--a", "0.1"]);
    assert_eq!(code, 2);
    assert!(out.is_empty() && err.contains("infeasible"), "{err}");
    let (code, v) = json(&["solve", "--h", "0.4", "--a", "0.35"]);
    assert_eq!(code, 0);
    validate(&v, &schema("solve")).unwrap();
    assert_eq!(v["converged"], Value::Bool(true));
    assert!(num(&v, &["residual"]) <= 1e-6);
    assert!((v["phi"][0].as_f64().unwrap() - 0.4).abs() < 1e-6);
    assert!((v["phi"][1].as_f64().unwrap() - 0.35).abs() < 1e-6);
}

#[test]
fn solve_reports_non_convergence() {
    // below the resolution of the forward map
    let (code, out, err) = kmr(&["solve", "--h", "0.9", "--a", "-0.2", "--tol", "1e-19"]);
    assert_eq!(code, 3, "{out} {err}");
    let v: Value = serde_json::from_str(&out).unwrap();
    validate(&v, &schema("solve")).unwrap();
    assert_eq!(v["converged"], Value::Bool(false));
}

#[test]
fn verify_passes_and_validates() {
    let (code, v) = json(&["verify", "--theta", "0.7", "--alpha", "-0.5", "--res", "64"]);
    assert_eq!(code, 0);
    validate(&v, &schema("verify")).unwrap();
    assert_eq!(v["all_ok"], Value::Bool(true));
    assert_eq!(v["edges"].as_array().unwrap().len(), 4);
}

#[test]
fn limits_report() {
    let (code, v) = json(&["limits", "--regime", "scherk1p"]);
    assert_eq!(code, 0);
    validate(&v, &schema("limits")).unwrap();
    let d: Vec<f64> = v["samples"].as_array().unwrap().iter().map(|s| s["distance"].as_f64().unwrap()).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]), "{d:?}");
    let (code, v) = json(&["limits", "--regime", "scherk2p", "--alpha-inf", "-0.5"]);
    assert_eq!(code, 0);
    assert_eq!(v["alpha_inf"].as_f64(), Some(-0.5));
    assert!(v["samples"].as_array().unwrap().iter().all(|s| s["alternation"] == Value::Bool(true)));
}

struct Obj {
    vertices: Vec<[f64; 3]>,
    faces: Vec<[usize; 4]>,
}

fn parse_obj(text: &str) -> Obj {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for line in text.lines() {
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it.map(|x| x.parse().unwrap()).collect();
                vertices.push([c[0], c[1], c[2]]);
            }
            Some("f") => {
                let c: Vec<usize> = it.map(|x| x.parse().unwrap()).collect();
                faces.push([c[0], c[1], c[2], c[3]]);
            }
            Some("#") | Some("o") | None => {}
            Some(other) => panic!("unexpected record {other}"),
        }
    }
    Obj { vertices, faces }
}

fn significant_digits(tok: &str) -> usize {
    let mant = tok.split('e').next().unwrap();
    let digits: String = mant.chars().filter(char::is_ascii_digit).collect();
    digits.trim_start_matches('0').len()
}

#[test]
fn mesh_obj_layout() {
    let (code, out, _) = kmr(&["mesh", "--theta", "1.0", "--alpha", "0.7", "--res", "48"]);
    assert_eq!(code, 0);
    let obj = parse_obj(&out);
    let p = SurfaceParams::new(1.0, 0.7).unwrap();
    let mesh = kmr_core::surface::build_graph_piece(&p, kmr_core::surface::MeshOptions::new(48, 48)).unwrap();
    // truncation removes a ring of samples around each end
    let dropped = mesh.samples.iter().filter(|s| s.is_none()).count();
    assert!(dropped > 0);
    assert_eq!(obj.vertices.len(), 48 * 48 - dropped);
    assert_eq!(obj.faces.len(), mesh.quads().len());
    // vertices follow the grid in row-major order
    let expected: Vec<_> = mesh.samples.iter().flatten().collect();
    for (v, s) in obj.vertices.iter().zip(&expected) {
        for (a, b) in v.iter().zip(s.x.0) {
            assert!((a - b).abs() <= 1e-8 * (1.0 + b.abs()));
        }
    }
    assert!(obj.faces.windows(2).all(|w| w[0][0] < w[1][0]));
    assert!(obj.faces.iter().flatten().all(|&k| k >= 1 && k <= obj.vertices.len()));
    for line in out.lines().filter(|l| l.starts_with("v ")) {
        for tok in line.split_whitespace().skip(1) {
            assert!(significant_digits(tok) <= 9, "{tok}");
        }
    }
}

fn x2_extent(obj: &Obj) -> f64 {
    let (lo, hi) = obj.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |b, v| (b.0.min(v[1]), b.1.max(v[1])));
    hi - lo
}

#[test]
fn conjugate_mesh_spans_a_unit_slab() {
    let (code, out, _) = kmr(&["mesh", "--theta", "0.8", "--alpha", "0.3", "--conjugate"]);
    assert_eq!(code, 0);
    assert!((x2_extent(&parse_obj(&out)) - 1.0).abs() < 1e-3);
    // at α = 0 the ends sit on the window corners; one window reaches half
    // the slab and the period cell all of it
    let (_, out, _) = kmr(&["mesh", "--theta", "0.8", "--alpha", "0", "--conjugate"]);
    assert!((x2_extent(&parse_obj(&out)) - 0.5).abs() < 1e-3);
    let (code, out, _) = kmr(&["mesh", "--theta", "0.8", "--alpha", "0", "--conjugate", "--cell", "--res", "64"]);
    assert_eq!(code, 0);
    let obj = parse_obj(&out);
    assert!((x2_extent(&obj) - 1.0).abs() < 1e-3);
    assert_eq!(out.lines().filter(|l| l.starts_with("o ")).count(), 2);
    assert!(obj.faces.iter().flatten().all(|&k| k >= 1 && k <= obj.vertices.len()));
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.obj");
    let (code, out, _) = kmr(&["mesh", "--theta", "1.0", "--alpha", "0.7", "--res", "24", "--out", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let (_, direct, _) = kmr(&["mesh", "--theta", "1.0", "--alpha", "0.7", "--res", "24"]);
    assert_eq!(std::fs::read_to_string(&path).unwrap(), direct);
    let bad = dir.path().join("missing").join("m.obj");
    let (code, _, err) = kmr(&["params", "--theta", "1.0", "--alpha", "0.7", "--out", bad.to_str().unwrap()]);
    assert_eq!(code, 1, "{err}");
}

fn binary(args: &[&str], threads: &str) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_kmr"))
        .args(args)
        .env("KMR_THREADS", threads)
        .output()
        .unwrap();
    (out.status.code().unwrap(), out.stdout)
}

#[test]
fn binary_output_is_independent_of_the_thread_count() {
    let args = ["mesh", "--theta", "0.6", "--alpha", "-1.1", "--res", "64"];
    let (c1, one) = binary(&args, "1");
    let (c4, four) = binary(&args, "4");
    assert_eq!((c1, c4), (0, 0));
    assert_eq!(Sha256::digest(&one), Sha256::digest(&four));
    let (code, _) = binary(&["params", "--theta", "1", "--alpha", "0"], "zero");
    assert_eq!(code, 1);
}
