use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use relent_cli::run;
use relent_cli::state_file::StateFile;

const BELL: &str = r#"{
  "dims": [2, 2],
  "matrix": [
    [[0.5, 0], [0, 0], [0, 0], [0.5, 0]],
    [[0, 0], [0, 0], [0, 0], [0, 0]],
    [[0, 0], [0, 0], [0, 0], [0, 0]],
    [[0.5, 0], [0, 0], [0, 0], [0.5, 0]]
  ],
  "label": "bell"
}
"#;

const MIXED: &str = r#"{"dims": [2, 2], "matrix": [
  [[0.25, 0], [0, 0], [0, 0], [0, 0]],
  [[0, 0], [0.25, 0], [0, 0], [0, 0]],
  [[0, 0], [0, 0], [0.25, 0], [0, 0]],
  [[0, 0], [0, 0], [0, 0], [0.25, 0]]]}"#;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn relent(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("relent").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn bell_state_values() {
    let dir = tempfile::tempdir().unwrap();
    let bell = write(dir.path(), "bell.json", BELL);
    let b = bell.to_str().unwrap();

    assert_eq!(relent(&["relent", b, b]), (0, "0.000000\n".into(), String::new()));
    assert_eq!(relent(&["entropy", b]).1, "0.000000\n");
    // S(ρ_A) + S(ρ_B) − S(ρ) = 2 ln 2
    assert_eq!(relent(&["mi", b, "--dims", "2x2"]).1, format!("{:.6}\n", 2.0 * 2f64.ln()));

    let (code, out, _) = relent(&["ree", b, "--free-set", "separable"]);
    assert_eq!(code, 0);
    let inner = out.trim().strip_prefix('[').unwrap();
    let (bracket, rest) = inner.split_once(']').unwrap();
    let (lo, hi) = bracket.split_once(", ").unwrap();
    let (lo, hi): (f64, f64) = (lo.parse().unwrap(), hi.parse().unwrap());
    // pure-state value: entropy of the marginal
    assert!(lo <= 2f64.ln() + 1e-6 && 2f64.ln() <= hi + 1e-6, "{out}");
    assert!(rest.contains("iterations"));
}

#[test]
fn leaking_support_prints_inf() {
    let dir = tempfile::tempdir().unwrap();
    let bell = write(dir.path(), "bell.json", BELL);
    let mixed = write(dir.path(), "mixed.json", MIXED);
    let (m, b) = (mixed.to_str().unwrap(), bell.to_str().unwrap());
    assert_eq!(relent(&["relent", m, b]).1, "inf\n");
    // D(Φ⁺‖I/4) = ln 4
    assert_eq!(relent(&["relent", b, m]).1, format!("{:.6}\n", 4f64.ln()));
}

#[test]
fn usage_and_parse_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"dims": [2], "matrix": [[[1, 0], [0.3, 0]], [[0, 0], [0, 0]]]}"#);
    let (code, out, err) = relent(&["entropy", bad.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (1, ""));
    assert!(err.contains("row 0, column 1"), "{err}");

    assert_eq!(relent(&["frobnicate"]).0, 1);
    assert_eq!(relent(&["entropy", "/does/not/exist.json"]).0, 1);
    let bell = write(dir.path(), "bell.json", BELL);
    assert_eq!(relent(&["ree", bell.to_str().unwrap(), "--free-set", "nonsense"]).0, 1);
    assert_eq!(relent(&["mi", bell.to_str().unwrap(), "--dims", "3x3"]).0, 1);
}

#[test]
fn state_files_round_trip_byte_for_byte() {
    let f = StateFile::parse(BELL).unwrap();
    assert_eq!(f.emit(), BELL);
    // validation clips the spectrum, so the operator only agrees to round-off
    let back = StateFile::from_density(&f.to_density().unwrap(), Some("bell".into()));
    for (r, s) in back.matrix.iter().flatten().zip(f.matrix.iter().flatten()) {
        assert!((r[0] - s[0]).abs() < 1e-12 && (r[1] - s[1]).abs() < 1e-12);
    }
}

#[test]
fn hull_descriptor_reads_vertices() {
    let dir = tempfile::tempdir().unwrap();
    let bell = write(dir.path(), "bell.json", BELL);
    let hull = format!("{{\"states\": [{BELL}, {MIXED}]}}");
    let hull_path = write(dir.path(), "hull.json", &hull);
    let desc = format!("hull:{}", hull_path.display());
    let (code, out, err) = relent(&["ree", bell.to_str().unwrap(), "--free-set", &desc]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("[0.000000, 0.000000]"), "{out}");
}

#[test]
fn verify_passes_and_reports_counts() {
    let (code, out, _) = relent(&["verify", "--count", "40", "--seed", "4"]);
    assert_eq!(code, 0, "{out}");
    for suite in ["product-identity", "expansion", "scaling", "data-processing"] {
        assert!(out.lines().any(|l| l.starts_with(suite) && l.contains("passed")), "{out}");
    }
}

#[test]
fn sequence_run_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write(
        dir.path(),
        "m.json",
        r#"{"family": {"dominated": {"sigma": {"random": {"dims": [2, 2]}}, "c": 0.5, "len": 6}},
            "models": ["separable", "ppt"], "seed": 5}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let m = manifest.to_str().unwrap();
    let (code, out, err) = relent(&["seq", "run", m, "--out", a.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let verdict: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(verdict["models"][0]["predicted"], "converges");
    assert_ne!(verdict["models"][0]["agreement"], "contradiction");
    assert_eq!(relent(&["seq", "run", m, "--out", b.to_str().unwrap()]).0, 0);

    for file in ["model-0.csv", "model-1.csv", "verdict.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap(), "{file}");
    }
    let table = fs::read_to_string(a.join("model-0.csv")).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().starts_with("n,trace_dist,lower,upper,gap"));
    assert_eq!(lines.count(), 7);
}

#[test]
fn manifest_with_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = write(
        dir.path(),
        "m.json",
        r#"{"family": {"lsc_gap": {"dims": [2, 3]}}, "models": ["separable"], "verbose": true}"#,
    );
    let (code, _, err) = relent(&["seq", "run", manifest.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(err.contains("verbose"), "{err}");
}

#[test]
fn binary_reports_exit_codes() {
    let exe = env!("CARGO_BIN_EXE_relent");
    let status = Command::new(exe).arg("entropy").status().unwrap();
    assert_eq!(status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bell = write(dir.path(), "bell.json", BELL);
    let out = Command::new(exe).args(["entropy", bell.to_str().unwrap()]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0.000000\n");
}
