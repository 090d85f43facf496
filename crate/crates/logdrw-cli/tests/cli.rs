//! End-to-end CLI checks: exit codes, malformed-input diagnostics, and
//! byte-stable JSON output.

use std::io::Write;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_logdrw"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn write_file(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    f.write_all(text.as_bytes()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn normalize_identity_word() {
    let out = run(&["drw", "normalize", "--p", "2", "--m", "2", "V(0;1;1,2)"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("1 *"), "unexpected output: {}", text);
}

#[test]
fn normalize_rejects_bad_words() {
    for bad in ["V(0;1)", "W(1)", "V(0;1;x)"] {
        let out = run(&["drw", "normalize", bad]);
        assert_eq!(out.status.code(), Some(2), "word {}", bad);
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn verify_absolute_passes_and_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let mon = write_file(&dir, "n.mon", "rank 1\nfacet 1\n");
    let args = [
        "compare", "verify", "--monoid", &mon, "--p", "2", "--m", "2", "--box-bound", "3",
        "--json",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "JSON output not byte-stable");
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("\"pass\":true"));
    assert!(text.contains("\"verdict\":\"pass\""));
}

#[test]
fn verify_relative_and_quotient() {
    let dir = tempfile::tempdir().unwrap();
    let p2 = write_file(&dir, "n2.mon", "rank 2\nfacet 1 0\nfacet 0 1\n");
    let diag = write_file(&dir, "diag.mon", "rank 1\nfacet 1\nhom 1\nhom 1\n");
    let ideal = write_file(&dir, "j.mon", "rank 1\nfacet 1\nideal 1\n");
    let rel = run(&[
        "compare", "verify", "--monoid", &p2, "--hom", &diag, "--p", "2", "--m", "2",
        "--box-bound", "2",
    ]);
    assert!(rel.status.success(), "{}", String::from_utf8_lossy(&rel.stderr));
    let quo = run(&[
        "compare", "verify", "--monoid", &p2, "--hom", &diag, "--ideal", &ideal, "--p", "2",
        "--m", "2", "--box-bound", "2",
    ]);
    assert!(quo.status.success(), "{}", String::from_utf8_lossy(&quo.stderr));
}

#[test]
fn malformed_monoid_file_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_file(&dir, "bad.mon", "rank 1\nfacet x\n");
    let out = run(&["compare", "verify", "--monoid", &bad]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "diagnostic missing location: {}", err);
}

#[test]
fn counterexample_exits_one_with_witness_json() {
    let out = run(&["compare", "counterexample", "--p", "2", "--k", "4", "--m", "3", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"confirmed\":true"));
    assert!(text.contains("\"in_label_set\":false"));
    // Parameter precondition violations are usage errors.
    let out = run(&["compare", "counterexample", "--p", "2", "--k", "3", "--m", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn monoid_check_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let p2 = write_file(&dir, "n2.mon", "rank 2\nfacet 1 0\nfacet 0 1\n");
    let diag = write_file(&dir, "diag.mon", "rank 1\nfacet 1\nhom 1\nhom 1\n");
    let out = run(&["monoid", "check", "--monoid", &p2, "--hom", &diag, "--json"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"pass\":true"));
    assert!(text.contains("p-saturated"));
}

#[test]
fn cohomology_table_runs() {
    let dir = tempfile::tempdir().unwrap();
    let mon = write_file(&dir, "n.mon", "rank 1\nfacet 1\n");
    let out = run(&[
        "cohomology", "--monoid", &mon, "--p", "2", "--m", "2", "--box-bound", "2", "--json",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"table\""));
    assert!(text.contains("\"homology\""));
}
