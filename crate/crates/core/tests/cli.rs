use std::path::Path;
use std::process::{Command, Output};

use chern_lab::mvf::MvfFile;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chern-lab")).args(args).output().expect("spawn chern-lab")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    for kind in ["winding", "bloch", "paper-example", "random-unitary", "random-projection"] {
        let a = dir.path().join(format!("{kind}-a.mvf"));
        let b = dir.path().join(format!("{kind}-b.mvf"));
        for p in [&a, &b] {
            let out = run(&["generate", kind, "--size", "8", "--seed", "7", "--out", s(p)]);
            assert!(out.status.success(), "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        }
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap(), "{kind} differs between runs");
    }
    let a = dir.path().join("seed1.mvf");
    run(&["generate", "random-unitary", "--size", "8", "--seed", "1", "--out", s(&a)]);
    let b = dir.path().join("random-unitary-a.mvf");
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn compute_chern_of_a_winding_field() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("w.mvf");
    let json = dir.path().join("w.json");
    let form = dir.path().join("ch.mvf");
    assert!(run(&["generate", "winding", "--size", "4096", "--m", "-2", "--out", s(&f)]).status.success());
    let out = run(&["compute", "chern", s(&f), "--out", s(&form), "--json", s(&json)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["what"], "chern");
    let ch = MvfFile::read(&form).unwrap();
    assert_eq!(ch.header.degree, 1);
    let total = ch.form.integrate().unwrap();
    assert!((total.re + 2.0).abs() < 1e-5, "{total}");
}

#[test]
fn verify_exit_codes() {
    let ok = run(&["verify", "sums", "--size", "16"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    assert!(String::from_utf8_lossy(&ok.stdout).lines().all(|l| l.starts_with("PASS")));

    // A tolerance below every residual fails the run.
    let strict = run(&["verify", "integrality", "--size", "16", "--tol", "1e-300"]);
    assert_eq!(strict.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&strict.stdout).contains("FAIL"));

    assert_eq!(run(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "sums", "--size", "4"]).status.code(), Some(2));
}

#[test]
fn verify_writes_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    assert_eq!(run(&["verify", "sums", "--size", "16", "--json", s(&json)]).status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["schema"], chern_lab::report::SCHEMA);
    assert_eq!(v["pass"], true);
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["anchor"].is_string()));
}

#[test]
fn corrupted_field_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("u.mvf");
    assert!(run(&["generate", "random-unitary", "--size", "8", "--out", s(&f)]).status.success());
    let clean = run(&["verify", "sums", "--size", "16", "--field", s(&f)]);
    assert_eq!(clean.status.code(), Some(0), "{}", String::from_utf8_lossy(&clean.stdout));

    // Scale one sample so it is no longer unitary.
    let mut file = MvfFile::read(&f).unwrap();
    let mut comps = file.form.components().to_vec();
    comps[0][0] *= 1.5;
    file.form = chern_lab::MatrixForm::from_components(file.grid(), 0, file.header.matdim, comps).unwrap();
    file.write(&f).unwrap();
    let bad = run(&["verify", "sums", "--size", "16", "--field", s(&f)]);
    assert_eq!(bad.status.code(), Some(1), "{}", String::from_utf8_lossy(&bad.stdout));

    // Truncated bytes are a format error.
    let bytes = std::fs::read(&f).unwrap();
    std::fs::write(&f, &bytes[..bytes.len() - 3]).unwrap();
    assert_eq!(run(&["verify", "sums", "--size", "16", "--field", s(&f)]).status.code(), Some(2));
}
