//! Golden outputs for every subcommand. Regenerate with `UPDATE_GOLDEN=1`.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const CASES: &[(&str, &[&str])] = &[
    ("verify_pencil_scalar", &["verify-pencil", "@scalar.json"]),
    ("verify_pencil_family", &["verify-pencil", "@family_eta01.json", "--seed", "7"]),
    ("positivity_family", &["positivity", "@family_eta0.json"]),
    ("standardize_family", &["standardize", "@family_eta01.json"]),
    ("fuchsian_family", &["fuchsian", "@family_eta0.json"]),
    ("fuchsian_scalar_complex", &["fuchsian", "@scalar.json", "--lambda", "1,0.5"]),
    ("heun_params_eta0", &["heun-params", "@family_eta0.json"]),
    ("heun_params_eta01", &["heun-params", "@family_eta01.json", "--lambda", "3"]),
    ("spectrum_scalar", &["spectrum", "@scalar.json", "--count", "4"]),
    ("spectrum_family_both", &["spectrum", "@family_eta01.json", "--method", "both", "--count", "6"]),
    ("eigenfunction_family", &["eigenfunction", "@family_eta0.json", "--index", "1", "--tmax", "5", "--samples", "21"]),
    ("confluence", &["confluence", "--mu-list", "40,160,640", "--count", "3"]),
];

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.out"))
}

fn ncho(args: &[&str]) -> Output {
    let args: Vec<String> = args
        .iter()
        .map(|a| match a.strip_prefix('@') {
            Some(file) => fixture(file).display().to_string(),
            None => a.to_string(),
        })
        .collect();
    Command::new(env!("CARGO_BIN_EXE_ncho"))
        .args(&args)
        .output()
        .expect("binary runs")
}

#[test]
fn outputs_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut mismatched = Vec::new();
    for (name, args) in CASES {
        let out = ncho(args);
        assert!(
            out.status.success(),
            "{name} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        );
        let path = golden(name);
        if update {
            std::fs::write(&path, &out.stdout).unwrap();
            continue;
        }
        let expected = std::fs::read(&path).unwrap_or_else(|_| panic!("missing {}", path.display()));
        if expected != out.stdout {
            mismatched.push(*name);
        }
    }
    assert!(mismatched.is_empty(), "outputs differ from golden files: {mismatched:?}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    for (name, args) in CASES {
        let first = ncho(args);
        let second = ncho(args);
        assert_eq!(first.stdout, second.stdout, "{name} is not deterministic");
    }
}

#[test]
fn out_flag_writes_the_same_bytes() {
    let dir = std::env::temp_dir().join(format!("ncho-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("spectrum.json");
    let target_arg = target.display().to_string();
    let out = ncho(&["spectrum", "@scalar.json", "--count", "4", "--out", &target_arg]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(std::fs::read(&target).unwrap(), ncho(&["spectrum", "@scalar.json", "--count", "4"]).stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn failures_use_exit_codes_and_structured_errors() {
    let dir = std::env::temp_dir().join(format!("ncho-err-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, text: &str| {
        let path = dir.join(name);
        std::fs::write(&path, text).unwrap();
        path.display().to_string()
    };

    let missing_b = write("missing_b.json", r#"{"p":1,"mu":0.5,"A":[[[1,0]]],"C0":[[[0,0]]]}"#);
    let out = ncho(&["positivity", &missing_b]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "schema");
    assert_eq!(err["path"], "$.B");

    let not_hermitian = write(
        "not_hermitian.json",
        r#"{"p":2,"mu":0.5,"A":[[[1,0],[1,0]],[[0,0],[1,0]]],"B":[[[0,0],[0,0]],[[0,0],[0,0]]],"C0":[[[0,0],[0,0]],[[0,0],[0,0]]]}"#,
    );
    let out = ncho(&["positivity", &not_hermitian]);
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "contract_violation");

    let on_circle = write("on_circle.json", r#"{"p":1,"mu":0.5,"A":[[[1,0]]],"B":[[[0.5,0]]],"C0":[[[0,0]]]}"#);
    let out = ncho(&["spectrum", &on_circle, "--method", "connect"]);
    assert_eq!(out.status.code(), Some(4));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].is_string() && err["message"].is_string());

    let out = ncho(&["spectrum", "@scalar.json", "--method", "sideways"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}
