//! End-to-end runs of the command-line surface: exit codes, both report
//! formats, file round trips, and the verify cross-check.

use std::process::Command;

use qsep::cli::run;

fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let full: Vec<String> = std::iter::once("qsep".to_string())
        .chain(args.iter().map(|s| s.to_string()))
        .collect();
    let code = run(full, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).expect("utf8 stdout"),
        String::from_utf8(err).expect("utf8 stderr"),
    )
}

fn json_without_timing(text: &str) -> serde_json::Value {
    let mut value: serde_json::Value = serde_json::from_str(text).expect("valid json");
    value.as_object_mut().expect("object").remove("timing_ms");
    value
}

#[test]
fn classify_file_text_report() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.txt");
    std::fs::write(&path, "000 1/2\n010 1/2\n101 1/2\n111 1/2\n").unwrap();

    let (code, out, err) = run_cli(&["classify", path.to_str().unwrap()]);
    assert_eq!(code, 0, "stderr: {err}");
    assert!(out.contains("family: Family 2"), "{out}");
    assert!(out.contains("subset {2}"), "{out}");
    assert!(out.contains("separable: true"), "{out}");
}

#[test]
fn classify_generated_cluster_json_report() {
    let (code, out, _) = run_cli(&["classify", "--gen", "c4", "--format", "json-like"]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["family"], 4);
    assert_eq!(doc["separable"], false);
    assert_eq!(doc["fast_path"], "m=4");
    assert!(doc["search"]["canonical_forms"].as_u64().unwrap() >= 1);
    assert_eq!(doc["search"]["rank1_hits"], 0);
}

#[test]
fn structured_reports_are_stable() {
    let first = run_cli(&["classify", "--gen", "random_sparse", "--n", "6", "--m", "8", "--seed", "5", "--format", "json-like"]);
    let second = run_cli(&["classify", "--gen", "random_sparse", "--n", "6", "--m", "8", "--seed", "5", "--format", "json-like"]);
    assert_eq!(first.0, 0);
    assert_eq!(second.0, 0);
    assert_eq!(json_without_timing(&first.1), json_without_timing(&second.1));
}

#[test]
fn text_and_json_verdicts_match() {
    let (_, text, _) = run_cli(&["classify", "--gen", "ghz", "--n", "6"]);
    let (_, json, _) = run_cli(&["classify", "--gen", "ghz", "--n", "6", "--format", "json-like"]);
    let doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(text.contains("family: Family 3"));
    assert_eq!(doc["family"], 3);
    assert!(text.contains("fast path: prime-m"));
    assert_eq!(doc["fast_path"], "prime-m");
}

#[test]
fn exit_codes() {
    // Usage: no input at all.
    let (code, _, err) = run_cli(&["classify"]);
    assert_eq!(code, 1, "{err}");

    // Usage: unknown generator kind.
    let (code, _, _) = run_cli(&["classify", "--gen", "nope"]);
    assert_eq!(code, 1);

    // Parse error: malformed line.
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "00 what\n").unwrap();
    let (code, _, err) = run_cli(&["classify", bad.to_str().unwrap()]);
    assert_eq!(code, 2, "{err}");

    // Parse error: unreadable path.
    let (code, _, _) = run_cli(&["classify", "/nonexistent/state.txt"]);
    assert_eq!(code, 2);

    // Invariant violation: duplicate basis label.
    let dup = dir.path().join("dup.txt");
    std::fs::write(&dup, "00 1/2\n00 1/2\n").unwrap();
    let (code, _, err) = run_cli(&["classify", dup.to_str().unwrap()]);
    assert_eq!(code, 3, "{err}");

    // Help is not an error.
    let (code, out, _) = run_cli(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("classify"));
}

#[test]
fn gen_round_trips_through_classify() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ghz5.txt");
    let (code, _, err) = run_cli(&["gen", "ghz", "--n", "5", "-o", path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let (code, out, _) = run_cli(&["classify", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("family: Family 3"), "{out}");

    // Structured state files parse the same way.
    let json_path = dir.path().join("ghz5.json");
    let (code, _, _) = run_cli(&[
        "gen", "ghz", "--n", "5", "--format", "json-like", "-o",
        json_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let (code, out, _) = run_cli(&["classify", json_path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains("family: Family 3"), "{out}");
}

#[test]
fn gen_to_stdout() {
    let (code, out, _) = run_cli(&["gen", "bell"]);
    assert_eq!(code, 0);
    assert_eq!(out, "00 1\n11 1\n");
}

#[test]
fn factorize_reports_blocks() {
    let (code, out, _) = run_cli(&[
        "factorize", "--gen", "random_product", "--blocks", "2,2", "--seed", "42",
        "--format", "json-like",
    ]);
    assert_eq!(code, 0);
    let doc: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(doc["factors"].as_array().unwrap().len() >= 2);
}

#[test]
fn verify_batch_agrees() {
    let (code, out, err) = run_cli(&[
        "verify", "--gen", "random_sparse", "--n", "6", "--m", "8", "--count", "25",
        "--max-n", "8",
    ]);
    assert_eq!(code, 0, "stderr: {err}\nstdout: {out}");
    assert!(out.contains("agree: 25/25"), "{out}");
}

#[test]
fn verify_float_rank_mode() {
    let (code, out, _) = run_cli(&[
        "verify", "--gen", "random_product", "--blocks", "2,2", "--count", "5", "--float-rank",
    ]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("agree: 5/5"), "{out}");
}

#[test]
fn verify_rejects_oversized_input() {
    let (code, _, err) = run_cli(&["verify", "--gen", "ghz", "--n", "13", "--max-n", "10"]);
    assert_eq!(code, 3, "{err}");
    let (code, _, _) = run_cli(&["verify", "--gen", "ghz", "--n", "4", "--max-n", "20"]);
    assert_eq!(code, 1);
}

#[test]
fn bench_smoke() {
    let (code, out, _) = run_cli(&["bench", "--n-range", "3..4"]);
    assert_eq!(code, 0);
    assert!(out.contains("classify_ms"), "{out}");
    assert!(out.contains("ghz"), "{out}");
}

#[test]
fn workers_flag_keeps_reports_identical() {
    let one = run_cli(&["classify", "--gen", "c4", "--format", "json-like", "--workers", "1"]);
    let four = run_cli(&["classify", "--gen", "c4", "--format", "json-like", "--workers", "4"]);
    assert_eq!(one.0, 0);
    assert_eq!(four.0, 0);
    assert_eq!(json_without_timing(&one.1), json_without_timing(&four.1));
}

#[test]
fn binary_runs_end_to_end() {
    let exe = env!("CARGO_BIN_EXE_qsep");
    let output = Command::new(exe)
        .args(["classify", "--gen", "c4"])
        .output()
        .expect("binary runs");
    assert!(output.status.success());
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("family: Family 4"), "{stdout}");

    let output = Command::new(exe)
        .args(["verify", "--gen", "bell"])
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(0));
}
