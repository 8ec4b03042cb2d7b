//! End-to-end tests of the `xtalk` binary: exit codes, report content,
//! emit/analyze round trips, and sweep CSV output.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_xtalk")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf8 stdout")
}

fn stderr(output: &Output) -> String {
    String::from_utf8(output.stderr.clone()).expect("utf8 stderr")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

const DIRECT_NETLIST: &str = "\
node d 1 2 3 4
cap d 1 0.1
cap 1 2 70
cap 3 4 70
cap 1 gnd 50
cap 2 gnd 50
cap 3 gnd 50
cap 4 gnd 50
cap 1 3 6
cap 2 4 2
jj 1 2 modes=1m/1p
jj 3 4 modes=2m/2p
drive d d
";

fn write_netlist(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn analyze_reports_expected_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_netlist(dir.path(), "direct.nl", DIRECT_NETLIST);
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("2m: R = 1/28 (0.0357142857143) -> -28.94 dB"));
    assert!(text.contains("1m: R = 1/1 (1) -> 0.00 dB"));
    assert!(text.contains("1p: free-plus (eliminated)"));
}

#[test]
fn analyze_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_netlist(dir.path(), "direct.nl", DIRECT_NETLIST);
    for format in ["text", "json"] {
        let a = run(&["analyze", path.to_str().unwrap(), "--format", format]);
        let b = run(&["analyze", path.to_str().unwrap(), "--format", format]);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "format {format} not deterministic");
    }
}

#[test]
fn analyze_json_is_valid_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_netlist(dir.path(), "direct.nl", DIRECT_NETLIST);
    let out = run(&["analyze", path.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code(&out), 0);
    let value: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(value["crosstalk"][0]["target"], "1m");
    let entries = value["crosstalk"][0]["entries"].as_array().unwrap();
    let two_m = entries.iter().find(|e| e["victim"] == "2m").unwrap();
    assert_eq!(two_m["ratio"]["num"], "1");
    assert_eq!(two_m["ratio"]["den"], "28");
    assert_eq!(two_m["strength_db"], -28.94);
}

#[test]
fn parse_errors_exit_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_netlist(dir.path(), "bad.nl", "node a\ncap a a 5\n");
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(err.contains("line 2"), "stderr: {err}");
}

#[test]
fn missing_file_exits_1() {
    let out = run(&["analyze", "/nonexistent/path.nl"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn floating_subcircuit_exits_3_named() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_netlist(dir.path(), "float.nl", "node a b\ncap a b 5\n");
    let out = run(&["analyze", path.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("floating subcircuit: a, b"));
}

#[test]
fn zero_target_weight_exits_4() {
    let out = run(&[
        "builtin",
        "grounded-bus",
        "--Cd", "0.1", "--Cq", "70", "--Cg", "50", "--Cc", "4", "--Ct", "80",
        "--target", "2m",
    ]);
    assert_eq!(code(&out), 4);
    assert!(stderr(&out).contains("zero weight"));
}

#[test]
fn unknown_target_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_netlist(dir.path(), "direct.nl", DIRECT_NETLIST);
    let out = run(&["analyze", path.to_str().unwrap(), "--target", "nope"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn grounded_bus_builtin_shows_exact_zero_and_bus_channel() {
    let out = run(&[
        "builtin",
        "grounded-bus",
        "--Cd", "0.1", "--Cq", "70", "--Cg", "50", "--Cc", "4", "--Ct", "80",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("2m: R = 0/1 (0) -> -inf dB"), "{text}");
    // bus channel at Cc/Cg = 4/50, 20 log10 = -21.94 dB
    assert!(text.contains("t: R = 2/25 (0.08) -> -21.94 dB"), "{text}");
}

#[test]
fn floating_bus_builtin_matches_closed_form_strength() {
    let out = run(&[
        "builtin",
        "floating-bus",
        "--Cd", "0.1", "--Cq", "70", "--Cg", "50", "--Cc", "4", "--Ct", "60", "--Cb", "100",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("2m: R = 1/1351"), "{text}");
    assert!(text.contains("-62.61 dB"), "{text}");
}

#[test]
fn builtin_missing_parameter_exits_2() {
    let out = run(&["builtin", "direct", "--Cd", "0.1", "--Cg", "50"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--Cq"));
}

#[test]
fn builtin_rejects_inapplicable_parameter() {
    let out = run(&[
        "builtin", "direct",
        "--Cd", "0.1", "--Cq", "70", "--Cg", "50", "--Cb", "10",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--Cb"));
}

#[test]
fn builtin_warns_when_decoupled() {
    let out = run(&["builtin", "direct", "--Cd", "0.1", "--Cq", "70", "--Cg", "50"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("decoupled"));
    assert!(stdout(&out).contains("2m: R = 0/1 (0) -> -inf dB"));
}

#[test]
fn emit_then_analyze_equals_direct_analysis() {
    let dir = tempfile::tempdir().unwrap();
    let emitted = dir.path().join("circuit.nl");
    let args = [
        "builtin", "floating-bus",
        "--Cd", "0.1", "--Cq", "70", "--Cg", "50", "--Cc", "4", "--Ct", "60", "--Cb", "100",
    ];
    let emit_args: Vec<&str> = args
        .iter()
        .copied()
        .chain(["--emit", emitted.to_str().unwrap()])
        .collect();
    let out = run(&emit_args);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).is_empty());
    let direct = run(&args);
    let reanalyzed = run(&["analyze", emitted.to_str().unwrap()]);
    assert_eq!(code(&reanalyzed), 0);
    assert_eq!(stdout(&direct), stdout(&reanalyzed));
    // the bus coordinate name survives the file round trip
    let doc = std::fs::read_to_string(&emitted).unwrap();
    assert!(doc.contains("modes=t/tp"), "{doc}");
}

#[test]
fn builtin_direct_table_preset_strength() {
    // symmetric same-island with r = 1: ratio 1/3, -9.54 dB
    let out = run(&[
        "builtin", "direct",
        "--Cd", "0.1", "--Cq", "70", "--Cg", "50", "--Cc1", "50",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("2m: R = 1/3"), "{text}");
    assert!(text.contains("-9.54 dB"), "{text}");
}

#[test]
fn check_asymptotic_adds_section_when_topology_matches() {
    let out = run(&[
        "builtin", "direct",
        "--Cd", "1", "--Cq", "100", "--Cg", "100", "--Cc1", "1", "--Cc2", "1",
        "--check-asymptotic",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("asymptotic check (direct, large-island limit)"), "{text}");
    assert!(text.contains("within tolerance: yes"), "{text}");
    // non-canonical circuit: flag warns and omits the section
    let dir = tempfile::tempdir().unwrap();
    let path = write_netlist(
        dir.path(),
        "odd.nl",
        "node d a b\ncap d a 1\ncap a b 70\ncap a gnd 50\ncap b gnd 50\njj a b\ndrive p d\n",
    );
    let out = run(&["analyze", path.to_str().unwrap(), "--check-asymptotic"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(!stdout(&out).contains("asymptotic check"));
    assert!(stderr(&out).contains("no canonical topology"));
}

#[test]
fn sweep_writes_expected_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("sweep.csv");
    let out = run(&[
        "sweep", "--layout", "same", "--lambda", "1",
        "--r-min", "0.001", "--r-max", "10", "--points", "25",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "layout,lambda,r,R_num,R_den,M_dB");
    assert_eq!(lines.len(), 26);
    for line in &lines[1..] {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 6);
        assert_eq!(fields[0], "same");
        assert_eq!(fields[1], "1");
    }
    // endpoint rows carry the exact grid bounds and table-cell ratios:
    // r/(2+r) is 1/2001 at r = 0.001 and 5/6 at r = 10
    assert!(lines[1].starts_with("same,1,0.001,1,2001,"));
    assert!(lines[25].starts_with("same,1,10,5,6,"));
}

#[test]
fn sweep_single_point() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("one.csv");
    let out = run(&[
        "sweep", "--layout", "opposite", "--lambda", "1",
        "--r-min", "1", "--r-max", "1", "--points", "1",
        "--out", out_path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let csv = std::fs::read_to_string(&out_path).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("opposite,1,1,1,5,"));
}

#[test]
fn sweep_is_byte_deterministic_and_honors_thread_cap() {
    let dir = tempfile::tempdir().unwrap();
    let a_path = dir.path().join("a.csv");
    let b_path = dir.path().join("b.csv");
    let base = [
        "sweep", "--layout", "opposite", "--lambda", "1,2,5,10",
        "--r-min", "0.001", "--r-max", "10", "--points", "60",
    ];
    let out = Command::new(bin())
        .args(base.iter().chain(&["--out", a_path.to_str().unwrap()]))
        .env("XTALK_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let out = Command::new(bin())
        .args(base.iter().chain(&["--out", b_path.to_str().unwrap()]))
        .env("XTALK_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        std::fs::read(&a_path).unwrap(),
        std::fs::read(&b_path).unwrap()
    );
}

#[test]
fn sweep_invalid_grid_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("bad.csv");
    for args in [
        vec!["--r-min", "0", "--r-max", "1"],
        vec!["--r-min", "2", "--r-max", "1"],
        vec!["--r-min", "0.1", "--r-max", "1", "--points", "0"],
        vec!["--lambda", "0.5"],
        vec!["--lambda", "abc"],
    ] {
        let mut full = vec!["sweep", "--layout", "same"];
        full.extend(args.iter());
        full.extend(["--out", out_path.to_str().unwrap()]);
        let out = run(&full);
        assert_eq!(code(&out), 2, "args {args:?}: {}", stderr(&out));
    }
}

#[test]
fn relative_paths_work() {
    let dir = tempfile::tempdir().unwrap();
    write_netlist(dir.path(), "c.nl", DIRECT_NETLIST);
    let out = run_in(dir.path(), &["analyze", "c.nl"]);
    assert_eq!(code(&out), 0);
}
