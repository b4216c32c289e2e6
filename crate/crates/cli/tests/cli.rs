//! End-to-end tests of the kintersect binary: exit codes, output formats,
//! and byte-for-byte reproducibility.

use std::process::{Command, Output};

fn kintersect(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kintersect"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn member_reports_oracle_verdicts() {
    // K_4 is a strict-majority graph.
    let out = kintersect(&["member", "--family", "f2", "--graph", "C~"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "true\n");

    // The recursive family at t=3, p=3/4 is empty on 4 vertices, so even
    // K_4 is a non-member.
    let out = kintersect(&["member", "--family", "ft:t=3,p=3/4", "--graph", "C~"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "false\n");
}

#[test]
fn member_csv_and_jsonl() {
    let out = kintersect(&[
        "member", "--family", "f2", "--graph", "C~", "--format", "csv",
    ]);
    assert_eq!(stdout(&out), "family,n,graph,member\nf2,4,C~,true\n");
    let out = kintersect(&[
        "member", "--family", "f2", "--graph", "C~", "--format", "jsonl",
    ]);
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(record["member"], serde_json::json!(true));
    assert_eq!(record["n"], serde_json::json!(4));
}

#[test]
fn measure_closed_form_is_exact() {
    let out = kintersect(&[
        "measure",
        "--family",
        "f2",
        "--n",
        "3",
        "--p",
        "3/5",
        "--method",
        "closed-form",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("method closed-form"));
    assert!(text.contains("value 81/125"), "{text}");
}

#[test]
fn measure_mc_requires_seed_and_samples() {
    let out = kintersect(&[
        "measure",
        "--family",
        "f2",
        "--n",
        "4",
        "--p",
        "3/5",
        "--method",
        "mc",
        "--samples",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--seed"), "{}", stderr(&out));
}

#[test]
fn measure_mc_is_reproducible() {
    let args = [
        "measure",
        "--family",
        "f2",
        "--n",
        "6",
        "--p",
        "3/5",
        "--method",
        "mc",
        "--samples",
        "20000",
        "--seed",
        "42",
        "--format",
        "csv",
    ];
    let a = kintersect(&args);
    let b = kintersect(&args);
    assert_eq!(out_bytes(&a), out_bytes(&b));
    assert_eq!(a.status.code(), Some(0));
    let text = stdout(&a);
    assert!(text.starts_with("method,value,ci_low,ci_high,samples,seed\n"));
    assert!(text.contains(",20000,42"), "{text}");
}

fn out_bytes(out: &Output) -> &[u8] {
    &out.stdout
}

#[test]
fn verify_exhaustive_majority() {
    let out = kintersect(&[
        "verify",
        "--family",
        "f2",
        "--n",
        "4",
        "--t",
        "2",
        "--mode",
        "exhaustive",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("members: 22"));
    assert!(text.contains("pairs_checked: 253"));
    assert!(text.contains("failures: 0"));
    assert!(!text.contains("elapsed"));
}

#[test]
fn verify_flags_empty_family() {
    let out = kintersect(&[
        "verify",
        "--family",
        "ft:t=3,p=3/4",
        "--n",
        "4",
        "--t",
        "3",
        "--mode",
        "exhaustive",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("family_empty: true"));
}

#[test]
fn verify_sampled_needs_p() {
    let out = kintersect(&[
        "verify", "--family", "f2", "--n", "5", "--t", "2", "--mode", "sampled", "--budget", "10",
        "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--p"));
}

#[test]
fn verify_sampled_rejection_works() {
    let out = kintersect(&[
        "verify", "--family", "f2", "--n", "6", "--t", "2", "--mode", "sampled", "--budget", "50",
        "--seed", "7", "--p", "3/4",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("pairs_checked: 50"));
}

#[test]
fn witness_extraction_and_failure_exit() {
    // Two dense graphs on 5 vertices sharing everything: K_5 with itself.
    let k5 = "D~{";
    let out = kintersect(&["witness", "--g1", k5, "--g2", k5, "--t", "3", "--p", "3/4"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(
        stdout(&out).contains("vertices: {0,1,2}"),
        "{}",
        stdout(&out)
    );

    // Empty graphs carry no clique: witness not found, exit 1.
    let empty5 = "D??";
    let out = kintersect(&[
        "witness", "--g1", empty5, "--g2", empty5, "--t", "3", "--p", "3/4",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("witness not found"));
}

#[test]
fn bound_certificate_formats() {
    let out = kintersect(&["bound", "--t", "2", "--n", "6", "--p", "3/5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("union-bound-certificate v1\n"));
    assert!(text.contains("lower_bound:"));

    let out = kintersect(&[
        "bound", "--t", "3", "--n", "130", "--p", "3/4", "--format", "csv",
    ]);
    let text = stdout(&out);
    assert!(text.starts_with("t,n,p,term_cond1,subset_terms,truncated,lower_bound\n"));

    let out = kintersect(&[
        "bound", "--t", "3", "--n", "130", "--p", "3/4", "--format", "jsonl",
    ]);
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(record["n"], serde_json::json!(130));
    assert!(record["terms_cond2"].as_array().unwrap().len() > 10);
}

#[test]
fn counterexample_finds_n_star_and_writes_certificate() {
    let out = kintersect(&[
        "counterexample",
        "--t",
        "3",
        "--p",
        "3/4",
        "--target",
        "27/64",
        "--format",
        "jsonl",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let record: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(record["n_star"], serde_json::json!(118));
    let lower = record["certificate"]["lower_bound"].as_f64().unwrap();
    assert!(lower > 0.421875);

    // --out writes the same content to a file.
    let dir = std::env::temp_dir().join("kintersect-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("cert.txt");
    let path_str = path.to_str().unwrap();
    let out = kintersect(&[
        "counterexample",
        "--t",
        "3",
        "--p",
        "3/4",
        "--target",
        "27/64",
        "--out",
        path_str,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let written = std::fs::read_to_string(&path).unwrap();
    assert!(written.starts_with("n_star: 118\n"));
    assert!(written.contains("union-bound-certificate v1"));
    std::fs::remove_file(&path).ok();
}

#[test]
fn sweep_csv_matches_documented_columns() {
    let out = kintersect(&[
        "sweep", "--family", "f2", "--n", "20", "--p-from", "0.40", "--p-to", "0.60", "--steps",
        "21", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "p,value,ci_low,ci_high,method,samples,seed");
    assert_eq!(lines.len(), 22);
    assert!(lines[1].starts_with("2/5,"));
    assert!(lines[21].starts_with("3/5,"));
    // Exact rational grid points: 0.41 parses to 41/100 and so on.
    assert!(lines[2].starts_with("41/100,"));
}

#[test]
fn sweep_mc_requires_seed_for_non_majority() {
    let out = kintersect(&[
        "sweep",
        "--family",
        "fixed:edges=0-1",
        "--n",
        "5",
        "--p-from",
        "0.5",
        "--p-to",
        "0.7",
        "--steps",
        "3",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--samples"));
}

#[test]
fn usage_errors_name_the_offending_flag() {
    let out = kintersect(&["member", "--family", "nope", "--graph", "C~"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--family"));

    let out = kintersect(&["member", "--family", "f2", "--graph", "!!!"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("--graph"));

    // Feasibility: recursive evaluation cap.
    let out = kintersect(&[
        "measure",
        "--family",
        "ft:t=3,p=3/4",
        "--n",
        "25",
        "--p",
        "3/4",
        "--method",
        "mc",
        "--samples",
        "10",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("cap"));
}

#[test]
fn jsonl_sweep_round_trips() {
    let out = kintersect(&[
        "sweep", "--family", "f2", "--n", "10", "--p-from", "0.45", "--p-to", "0.55", "--steps",
        "3", "--format", "jsonl",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let mut rows = 0;
    for line in text.lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["p", "method", "value", "ci_low", "ci_high", "samples"] {
            assert!(record.get(key).is_some(), "missing {key} in {line}");
        }
        rows += 1;
    }
    assert_eq!(rows, 3);
}
