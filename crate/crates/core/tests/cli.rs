use std::path::{Path, PathBuf};
use std::process::Command;

use curvlab::exchange::{read_raw, write_tensor};
use curvlab::{generate, r1_tensor, GeneratorKind, GeneratorSpec, HermitianContext};
use tempfile::TempDir;

fn curvlab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_curvlab")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_r1() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("r1.json");
    write_tensor(&p, &r1_tensor(&HermitianContext::canonical(2).unwrap()), true).unwrap();
    let (code, out, _) = curvlab(&["validate", s(&p)]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("valid"));
}

#[test]
fn validate_names_the_violated_property() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", r#"{"dim": 4, "R": [[0, 0, 1, 2, 1.0]]}"#);
    let (code, out, _) = curvlab(&["validate", s(&p)]);
    assert_eq!(code, 1);
    assert!(out.contains("property 1"), "{out}");
}

#[test]
fn malformed_input_exits_2_with_location() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "trunc.json", "{\"dim\": 4, \"R\": [[0, 1");
    let (code, _, err) = curvlab(&["validate", s(&p)]);
    assert_eq!(code, 2);
    assert!(err.contains("line"), "{err}");
    let (code, _, err) = curvlab(&["analyze", s(&dir.path().join("missing.json"))]);
    assert_eq!(code, 2, "{err}");
    let p = write(&dir, "idx.json", r#"{"dim": 4, "R": [[0, 1, 7, 0, 1.0]]}"#);
    let (code, _, err) = curvlab(&["fit", s(&p)]);
    assert_eq!(code, 2);
    assert!(err.contains("R[0][2]"), "{err}");
}

#[test]
fn bad_structure_is_an_invariant_failure() {
    let dir = TempDir::new().unwrap();
    let p = write(
        &dir,
        "j.json",
        r#"{"dim": 4, "J": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]], "R": []}"#,
    );
    let (code, out, _) = curvlab(&["validate", s(&p)]);
    assert_eq!(code, 1);
    assert!(out.contains("J^2 = -I: 2 VIOLATED"), "{out}");
}

#[test]
fn analyze_model_file() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("model.json");
    let (code, _, err) = curvlab(&["generate", "--kind", "model", "--m", "2", "--K", "1", "--c", "4", "--out", s(&p)]);
    assert_eq!(code, 0, "{err}");
    let (code, out, _) = curvlab(&["analyze", s(&p), "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    let keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    for k in ["input", "residuals", "rk_defect", "constancy", "fit", "verdicts"] {
        assert!(keys.contains(&k), "{keys:?}");
    }
    assert!((v["fit"]["K"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((v["fit"]["c"].as_f64().unwrap() - 4.0).abs() < 1e-10);
    assert!(v["fit"]["residual"].as_f64().unwrap() < 1e-10);
    assert!(v["rk_defect"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["input"]["samples"], 200);
    assert_eq!(v["input"]["seed"], 0);
    assert!(v["verdicts"].as_array().unwrap().iter().all(|x| x["holds"] == true));
}

#[test]
fn text_and_json_carry_the_same_numbers() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("random.json");
    curvlab(&["generate", "--kind", "random", "--m", "2", "--seed", "4", "--out", s(&p)]);
    let (_, text, _) = curvlab(&["analyze", s(&p), "--samples", "50", "--seed", "2"]);
    let (_, json, _) = curvlab(&["analyze", s(&p), "--samples", "50", "--seed", "2", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let text_value = |prefix: &str, key: &str| -> f64 {
        let line = text.lines().find(|l| l.starts_with(prefix)).unwrap();
        let words: Vec<&str> = line.split_whitespace().collect();
        let at = words.iter().position(|w| *w == key).unwrap();
        words[at + 1].parse().unwrap()
    };
    assert_eq!(text_value("fit:", "K"), v["fit"]["K"].as_f64().unwrap());
    assert_eq!(text_value("fit:", "c"), v["fit"]["c"].as_f64().unwrap());
    assert_eq!(text_value("fit:", "residual"), v["fit"]["residual"].as_f64().unwrap());
    assert_eq!(
        text_value("constancy holomorphic:", "max_deviation"),
        v["constancy"]["holomorphic"]["max_deviation"].as_f64().unwrap()
    );
    let rk: f64 = text.lines().find_map(|l| l.strip_prefix("rk_defect: ")).unwrap().parse().unwrap();
    assert_eq!(rk, v["rk_defect"].as_f64().unwrap());
    assert!(v["fit"]["residual"].as_f64().unwrap() > 0.1);
}

#[test]
fn fit_prints_twelve_significant_digits() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("m.json");
    curvlab(&["generate", "--kind", "model", "--m", "2", "--K", "-2", "--c", "3", "--out", s(&p)]);
    let (code, out, _) = curvlab(&["fit", s(&p)]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "K -2.00000000000");
    assert_eq!(lines[1], "c 3.00000000000");
    assert!(lines[2].starts_with("residual "));
}

#[test]
fn generated_space_form_is_scaled_r1() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("sf.json");
    let (code, _, _) = curvlab(&["generate", "--kind", "space-form", "--m", "3", "--K", "2", "--out", s(&p)]);
    assert_eq!(code, 0);
    let raw = read_raw(&p).unwrap();
    let r1 = r1_tensor(&HermitianContext::canonical(3).unwrap());
    for (a, b) in raw.coeffs.iter().zip(r1.coeffs()) {
        assert_eq!(*a, 2.0 * b);
    }
}

#[test]
fn generate_is_deterministic_and_matches_library() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        curvlab(&["generate", "--kind", "random-rk", "--m", "2", "--seed", "5", "--out", s(p)]);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let lib = generate(&GeneratorSpec::new(GeneratorKind::RandomRk, 2).with_seed(5)).unwrap();
    assert_eq!(read_raw(&a).unwrap().coeffs, lib.coeffs());
}

#[test]
fn kernel_38_file_passes_lemma_4() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("k.json");
    curvlab(&["generate", "--kind", "kernel-38", "--m", "2", "--seed", "9", "--out", s(&p)]);
    let (code, out, _) = curvlab(&["verify", "--lemma", "4", "--input", s(&p)]);
    assert_eq!(code, 0, "{out}");
}

#[test]
fn random_file_fails_lemma_hypothesis() {
    let dir = TempDir::new().unwrap();
    let p = dir.path().join("r.json");
    curvlab(&["generate", "--kind", "random", "--m", "2", "--seed", "3", "--out", s(&p)]);
    let (code, out, _) = curvlab(&["verify", "--lemma", "1", "--input", s(&p), "--json"]);
    assert_eq!(code, 1);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["holds"], false);
    assert!(!v["verdicts"][0]["witnesses"].as_array().unwrap().is_empty());
}

#[test]
fn verify_sampled_kernels() {
    let (code, out, _) = curvlab(&["verify", "--lemma", "A", "--m", "2", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["verdicts"][0]["numeric"]["kernel dimension"], 0.0);
    let (code, out, _) = curvlab(&["verify", "--lemma", "4", "--m", "2", "--trials", "20"]);
    assert_eq!(code, 0);
    assert!(out.contains("fit residual") && out.contains("antiholomorphic deviation"), "{out}");
    let (code, _, _) = curvlab(&["verify", "--lemma", "1", "--m", "3", "--trials", "10"]);
    assert_eq!(code, 0);
}

#[test]
fn usage_errors_exit_64() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("x.json");
    for args in [
        vec!["verify", "--lemma", "2"],
        vec!["generate", "--kind", "model", "--m", "2", "--K", "1", "--out", s(&out)],
        vec!["generate", "--kind", "random", "--m", "2", "--eps", "0.1", "--out", s(&out)],
        vec!["generate", "--kind", "bogus", "--m", "2", "--out", s(&out)],
        vec!["generate", "--kind", "random", "--m", "1", "--out", s(&out)],
        vec!["frobnicate"],
        vec![],
    ] {
        let (code, _, err) = curvlab(&args);
        assert_eq!(code, 64, "{args:?}: {err}");
    }
    assert!(!out.exists());
    assert_eq!(curvlab(&["--help"]).0, 0);
}

#[test]
fn project_flag_repairs_raw_arrays() {
    let dir = TempDir::new().unwrap();
    let p = write(&dir, "bad.json", r#"{"dim": 4, "R": [[0, 1, 1, 0, 1.0]]}"#);
    assert_eq!(curvlab(&["analyze", s(&p)]).0, 1);
    let (code, out, _) = curvlab(&["analyze", s(&p), "--project", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["residuals"]["property_2"].as_f64().unwrap() < 1e-12);
}
