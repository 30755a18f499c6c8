//! End-to-end subcommand tests against the built binary.

use std::path::Path;
use std::process::{Command, Output};

fn bpdiff(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bpdiff"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_horn_model(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("horn.json");
    std::fs::write(
        &path,
        r#"{
            "variables": {"0": 2, "1": 2, "2": 2, "3": 2},
            "faces": [[0,1,2],[0,2,3],[1,2,3]],
            "potentials": {
                "0-1-2": {"shape": [2,2,2],
                          "data": [0.3,-0.2,0.5,0.0,-0.4,0.1,0.2,-0.1],
                          "layout": "row-major-sorted-vertices"}
            }
        }"#,
    )
    .unwrap();
    path
}

#[test]
fn closure_lists_faces_and_bethe_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_horn_model(dir.path());
    let out = bpdiff(&["closure", model.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("0-1-2\t+1"));
    assert!(text.contains("0-2\t-1"));
    assert!(text.contains("2\t+1"));
    assert_eq!(text.lines().count(), 8); // header + 7 faces

    let json_path = dir.path().join("closure.json");
    let out = bpdiff(&[
        "closure",
        model.to_str().unwrap(),
        "-o",
        json_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(doc["faces"].as_array().unwrap().len(), 7);
    assert_eq!(doc["bethe"]["2-3"], serde_json::json!(-1));
}

#[test]
fn solve_then_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_horn_model(dir.path());
    let beliefs = dir.path().join("beliefs.json");
    let out = bpdiff(&[
        "solve",
        model.to_str().unwrap(),
        "--algorithm",
        "bethe",
        "--eps",
        "0.5",
        "--iters",
        "500",
        "--tol",
        "1e-9",
        "-o",
        beliefs.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let diag = String::from_utf8(out.stderr).unwrap();
    assert!(diag.contains("converged"), "{diag}");

    let out = bpdiff(&["check", model.to_str().unwrap(), beliefs.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut d_residual = f64::NAN;
    let mut norm_err = f64::NAN;
    for line in text.lines() {
        let mut parts = line.split('\t');
        match (parts.next(), parts.next()) {
            (Some("d_residual"), Some(v)) => d_residual = v.parse().unwrap(),
            (Some("normalization_error"), Some(v)) => norm_err = v.parse().unwrap(),
            _ => {}
        }
    }
    assert!(d_residual < 1e-6, "d residual {d_residual}");
    assert!(norm_err < 1e-10, "normalization {norm_err}");
}

#[test]
fn oracle_output_is_consistent_under_check() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_horn_model(dir.path());
    let marginals = dir.path().join("marginals.json");
    let out = bpdiff(&[
        "oracle",
        model.to_str().unwrap(),
        "-o",
        marginals.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stderr).unwrap().contains("ln Z"));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&marginals).unwrap()).unwrap();
    assert!(doc["log_partition"].is_number());
    assert!(doc["free_energy"].is_number());

    let out = bpdiff(&[
        "check",
        model.to_str().unwrap(),
        marginals.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let d: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("d_residual\t"))
        .unwrap()
        .parse()
        .unwrap();
    assert!(d <= 1e-12, "oracle marginals must be consistent, got {d}");
}

#[test]
fn solve_reports_divergence_with_exit_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let model = write_horn_model(dir.path());
    let out = bpdiff(&[
        "solve",
        model.to_str().unwrap(),
        "--algorithm",
        "gbp",
        "--eps",
        "1.9",
        "--iters",
        "200",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("diverged"));
}

#[test]
fn bench_emits_csv_with_expected_header_and_rows() {
    let out = bpdiff(&[
        "bench", "--preset", "horn2", "--eps", "0.2,0.8", "--temp", "1", "--seeds", "5", "--iters",
        "10",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "algorithm,eps,temperature,seeds,converged_fraction,diverged_fraction,mean_decay_ratio"
    );
    assert_eq!(lines.count(), 4);

    let md = bpdiff(&[
        "bench", "--preset", "horn2", "--eps", "0.2", "--temp", "1", "--seeds", "3", "--format",
        "md",
    ]);
    assert!(md.status.success());
    let md_text = String::from_utf8(md.stdout).unwrap();
    assert!(md_text.starts_with("| algorithm"));
}

#[test]
fn validation_failures_exit_one() {
    // Unknown flag.
    let out = bpdiff(&["bench", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));

    // Missing model file.
    let out = bpdiff(&["oracle", "/nonexistent/model.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());

    // Bad document: data length mismatch.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"variables": {"0": 2, "1": 2}, "faces": [[0,1]],
            "potentials": {"0-1": {"shape": [2,2], "data": [0.0,0.0,0.0],
                                    "layout": "row-major-sorted-vertices"}}}"#,
    )
    .unwrap();
    let out = bpdiff(&["closure", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    // Unknown preset.
    let out = bpdiff(&["bench", "--preset", "triangle"]);
    assert_eq!(out.status.code(), Some(1));

    // Empty diffusivity grid.
    let out = bpdiff(&["bench", "--eps"]);
    assert_eq!(out.status.code(), Some(1));
    let out = bpdiff(&["bench", "--eps", "", "--seeds", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn bench_is_byte_deterministic() {
    let args = [
        "bench",
        "--preset",
        "horn2",
        "--eps",
        "0.3,0.9",
        "--temp",
        "0.3,3",
        "--seeds",
        "7",
        "--seed-base",
        "11",
    ];
    let a = bpdiff(&args);
    let b = bpdiff(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn help_exits_zero() {
    let out = bpdiff(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("bpdiff"));
}
