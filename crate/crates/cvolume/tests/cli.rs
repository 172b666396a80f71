//! End-to-end runs of the binary.

use serde_json::Value;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, Output};

fn cvolume(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cvolume")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cvolume-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn lens_reports_six_fifths_pi_squared() {
    let out = cvolume(&["lens", "--p", "5", "--q", "1", "--n", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["format"], 1);
    assert_eq!(v["volume"][0].as_f64().unwrap(), 0.0);
    assert!((v["volume"][1].as_f64().unwrap() - 1.2 * PI * PI).abs() < 1e-9);
}

#[test]
fn volume_of_the_bundled_figure_eight() {
    let out = cvolume(&["volume", "--fixture", "figure-eight", "--re"]);
    assert!(out.status.success());
    let re: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!((re - 2.0298832).abs() < 1e-7);
    let v = json(&cvolume(&["volume", "--fixture", "figure-eight"]));
    assert_eq!(v["per_crossing"].as_array().unwrap().len(), 4);
}

#[test]
fn errors_are_structured() {
    let out = cvolume(&["lens", "--p", "4", "--q", "2"]);
    assert!(!out.status.success());
    let v = json(&out);
    assert_eq!(v["format"], 1);
    assert_eq!(v["error"]["kind"], "BadLabel");

    let missing = cvolume(&["volume", "/nonexistent/presentation.json"]);
    assert_eq!(json(&missing)["error"]["kind"], "ParseError");

    let usage = cvolume(&["lens", "--p", "five"]);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(json(&usage)["error"]["kind"], "UsageError");
}

#[test]
fn validate_accepts_the_bundled_fixtures() {
    for name in ["kink", "figure-eight", "gluing-chain", "lens:7:2:3"] {
        let out = cvolume(&["validate", "--fixture", name]);
        assert!(out.status.success(), "{name}");
        assert_eq!(json(&out)["valid"], true);
    }
}

#[test]
fn solve_is_deterministic_and_finds_the_complete_structure() {
    let path = scratch("figure_eight_diagram.json");
    let fixture = json(&cvolume(&["volume", "--fixture", "figure-eight"]));
    assert!(fixture["volume"].is_array());
    let pres: Value = serde_json::from_str(cvolume::fixtures::FIGURE_EIGHT_JSON).unwrap();
    std::fs::write(&path, serde_json::to_string(&pres["diagram"]).unwrap()).unwrap();
    let args = ["--seed", "4", "--starts", "8", "solve", "--diagram", path.to_str().unwrap(), "-c", "comp0=parabolic"];
    let (a, b) = (cvolume(&args), cvolume(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    let best = v["results"][0]["volume"][0].as_f64().unwrap();
    assert!((best - 2.029883212819).abs() < 1e-8);
}

#[test]
fn fill_finds_the_meyerhoff_manifold() {
    let out = cvolume(&["--seed", "3", "--starts", "32", "fill", "--fixture", "figure-eight", "--p", "5", "--q", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert!((v["volume"][0].as_f64().unwrap() - 0.981368828892).abs() < 1e-9);
}

#[test]
fn glue_two_solid_tori_into_a_lens_space() {
    use cvolume::fixtures::solid_torus;
    use cvolume::io::{presentation_to_json, to_text, Presentation};
    use cvolume::C64;
    let (p, q, r, s) = (5i64, 2i64, 2i64, 1i64);
    let w = C64::from_polar(1.0, 2.0 * PI / 5.0);
    let x = C64::new(0.8, 0.3);
    let write = |name: &str, a: C64, m: C64| {
        let (diagram, chi, f) = solid_torus(a, x, m).unwrap();
        let pres = Presentation { diagram, shaping: Some(chi), flattening: Some(f), targets: vec![], expected: None };
        let path = scratch(name);
        std::fs::write(&path, to_text(&presentation_to_json(&pres))).unwrap();
        path
    };
    let one = write("torus_one.json", C64::new(0.6, -0.9), w);
    let two = write("torus_two.json", C64::new(1.3, 0.4), w.powi(r as i32));
    let matrix = format!("{p},{q},{r},{s}");
    let out = cvolume(&["glue", "--one", one.to_str().unwrap(), "--two", two.to_str().unwrap(), "--matrix", &matrix]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    let oracle = json(&cvolume(&["lens", "--p", "5", "--q", "2", "--n", "1"]));
    let (got, want) = (v["volume"][1].as_f64().unwrap(), oracle["volume"][1].as_f64().unwrap());
    let d = (got - want).rem_euclid(2.0 * PI * PI);
    assert!(d.min(2.0 * PI * PI - d) < 1e-9, "{got} vs {want}");
}

#[test]
fn selftest_subset_reports_json() {
    let out = cvolume(&["selftest", "--criterion", "2", "--criterion", "3"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["passed"], 2);
    assert_eq!(v["criteria"][1]["id"], 3);
}
