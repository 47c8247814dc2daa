use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn qtrop(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_qtrop")).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn report(args: &[&str]) -> (i32, Value) {
    let (code, text) = qtrop(args);
    (code, serde_json::from_str(&text).unwrap_or(Value::Null))
}

fn path(name: &str) -> String {
    data(name).display().to_string()
}

#[test]
fn valid_fixture_passes() {
    let (code, rep) = report(&["validate", &path("f1.json")]);
    assert_eq!(code, 0);
    assert_eq!(rep["violations"], serde_json::json!([]));
    assert_eq!(rep["precision"], serde_json::json!([20, 1]));
}

#[test]
fn c4_defect_names_condition_and_edge() {
    let (code, rep) = report(&["validate", &path("f8_c4_defect.json")]);
    assert_eq!(code, 1);
    let v = rep["violations"].as_array().unwrap();
    assert!(!v.is_empty());
    assert!(v.iter().all(|x| x["condition"] == "C4" && x["item"] == "e"));
}

#[test]
fn goodcoord_reports_monomial_case() {
    let (code, rep) = report(&["goodcoord", &path("t2_one_plus_pi_t.json"), "--order", "3"]);
    assert_eq!(code, 0);
    assert_eq!(rep["summary"], "MonomialCase(n=2)");
    let w = rep["good"]["w"]["terms"].as_array().unwrap();
    assert!(w.iter().all(|t| t[0].as_i64().unwrap() <= 3));
    let reached = rep["verified_to"][0].as_i64().unwrap() / rep["verified_to"][1].as_i64().unwrap();
    assert!(reached >= 20, "{}", rep["verified_to"]);
}

#[test]
fn psd_zero_locus_sets_status() {
    let (code, rep) = report(&["psd", &path("psd_4_1_1.json")]);
    assert_eq!(code, 0);
    assert_eq!(rep["zero"], true);
}

#[test]
fn lift_then_reduce_agrees() {
    let dir = std::env::temp_dir().join(format!("qtrop-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for f in ["f1.json", "f5.json", "f11.json"] {
        let (code, model) = qtrop(&["lift", &path(f)]);
        assert_eq!(code, 0, "{f}");
        let m = dir.join(f);
        std::fs::write(&m, model).unwrap();
        let (code, rep) = report(&["reduce", m.to_str().unwrap(), "--against", &path(f)]);
        assert_eq!(code, 0, "{f}: {}", rep["diff"]);
        assert_eq!(rep["diff"], serde_json::json!([]));
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_input_exits_two() {
    let dir = std::env::temp_dir().join(format!("qtrop-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, "{\"q\": 2, \"vertices\": [").unwrap();
    let (code, rep) = report(&["validate", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(rep["error"], "Parse");
    assert_eq!(qtrop(&["validate"]).0, 2);
    assert_eq!(qtrop(&["frobnicate", "x"]).0, 2);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn domain_errors_exit_one() {
    let (code, rep) = report(&["lift-star", &path("f1.json"), "--vertex", "nowhere"]);
    assert_eq!(code, 1);
    assert!(rep["error"].is_string());
}

#[test]
fn reports_are_byte_deterministic() {
    for args in [
        vec!["validate", "f8_c4_defect.json"],
        vec!["lift", "f5.json"],
        vec!["goodcoord", "t2_one_plus_pi_t.json"],
    ] {
        let full: Vec<String> =
            args.iter().enumerate().map(|(i, a)| if i == 1 { path(a) } else { a.to_string() }).collect();
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        assert_eq!(qtrop(&refs), qtrop(&refs), "{args:?}");
    }
}

#[test]
fn fixture_files_match_builtins() {
    for (name, file) in [("F1", "f1.json"), ("F5", "f5.json"), ("F8", "f8.json")] {
        let (code, text) = qtrop(&["fixture", name]);
        assert_eq!(code, 0);
        assert_eq!(text, std::fs::read_to_string(data(file)).unwrap(), "{name}");
    }
}
