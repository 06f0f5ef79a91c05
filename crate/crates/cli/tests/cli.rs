use std::fs;

use mcdc_cli::{run, EXIT_ERROR, EXIT_OK, EXIT_PARTIAL};

fn mcdc(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("mcdc").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn analyze_prints_graph_and_table() {
    let (code, out, err) = mcdc(&["analyze", "(a||b)&&(c||d)&&e"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.starts_with("expression: (a || b) && (c || d) && e\nconditions: 5\n"));
    assert!(out.contains("x1      x3    x2\n"));
    assert!(out.contains("pseudo-terminals: x3, x5, 0\n"));
    assert!(out.contains("(x4, 0)   x1, x2             11000\n"));
}

#[test]
fn analyze_single_condition() {
    let (code, out, _) = mcdc(&["analyze", "a"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("pseudo-terminals: none\n"));
    assert!(out.ends_with("edge  masked conditions  bitmask\n"));
}

#[test]
fn output_is_deterministic() {
    for args in [&["analyze", "a && !(b || c) || d"][..], &["dot", "a || b && c"], &["generate", "a && (b || c)"]] {
        assert_eq!(mcdc(args), mcdc(args));
    }
}

#[test]
fn dot_on_stdout() {
    let (code, out, _) = mcdc(&["dot", "x1 || x2"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("digraph bdd {\n"));
    assert!(out.contains("x1 -> x2 [style=dashed];"));
}

#[test]
fn run_worked_example_is_partial() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    fs::write(&path, "# worked example\n0 1 0 0 1\n").unwrap();
    let (code, out, _) = mcdc(&["run", "(a||b)&&(c||d)&&e", "--vectors", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_PARTIAL);
    assert!(out.contains("x3 (c)     no            yes\n"), "{out}");
    assert!(out.contains("x4 (d)     no            yes\n"), "{out}");
    assert!(out.contains("mcdc: 2/10 (20.0%)\n"), "{out}");
}

#[test]
fn run_full_suite_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    fs::write(&path, "0,0,0\n1,0,0\n0,1,0\n0,0,1\n").unwrap();
    let (code, out, _) = mcdc(&["run", "a || b || c", "--vectors", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("mcdc: 6/6 (100.0%)"));
}

#[test]
fn run_reports_bad_vector_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    fs::write(&path, "0 1\n").unwrap();
    let (code, _, err) = mcdc(&["run", "a && b && c", "--vectors", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("line 1: expected 3 values, got 2"), "{err}");
    let (code, _, err) = mcdc(&["run", "a", "--vectors", "/nonexistent/vectors.txt"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(!err.is_empty());
}

#[test]
fn check_exhaustive() {
    let (code, out, _) = mcdc(&["check", "--exhaustive", "a&&b"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "4 vectors checked, 0 mismatches\n");
}

#[test]
fn check_listed_vectors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.txt");
    fs::write(&path, "1 1 0\n0 0 1\n").unwrap();
    let (code, out, _) = mcdc(&["check", "a && b || c", "--vectors", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "2 vectors checked, 0 mismatches\n");
}

#[test]
fn check_exhaustive_limit() {
    let wide = (1..=21).map(|i| format!("c{i}")).collect::<Vec<_>>().join(" || ");
    let (code, _, err) = mcdc(&["check", "--exhaustive", &wide]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("at most 20"));
    let (code, out, _) = mcdc(&["check", &wide]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "4096 vectors checked, 0 mismatches\n");
}

#[test]
fn generate_writes_checkable_suite() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suite.txt");
    let expr = "(a || !b) && c || d";
    let (code, out, _) = mcdc(&["generate", expr, "--out", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK);
    assert!(out.starts_with("wrote "));
    let (code, out, _) = mcdc(&["run", expr, "--vectors", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_OK, "{out}");
}

#[test]
fn generate_to_stdout() {
    let (code, out, _) = mcdc(&["generate", "x1 && x2"]);
    assert_eq!(code, EXIT_OK);
    let data: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 3);
}

#[test]
fn fuzz_passes() {
    let (code, out, _) = mcdc(&["fuzz", "--conditions", "7", "--iterations", "100", "--seed", "11"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out, "100 iterations, 0 failures\n");
    let (code, _, _) = mcdc(&["fuzz", "--conditions", "65", "--iterations", "1"]);
    assert_eq!(code, EXIT_ERROR);
}

#[test]
fn usage_errors() {
    let (code, _, err) = mcdc(&["analyze", "a &&"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("syntax error at 4"), "{err}");
    let (code, _, err) = mcdc(&["bogus"]);
    assert_eq!(code, EXIT_ERROR);
    assert!(!err.is_empty());
    let (code, _, _) = mcdc(&["run", "a"]);
    assert_eq!(code, EXIT_ERROR);
    let (code, out, _) = mcdc(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("analyze"));
}

#[test]
fn too_many_conditions() {
    let wide = (1..=65).map(|i| format!("c{i}")).collect::<Vec<_>>().join(" && ");
    let (code, _, err) = mcdc(&["analyze", &wide]);
    assert_eq!(code, EXIT_ERROR);
    assert!(err.contains("65 conditions"), "{err}");
}
