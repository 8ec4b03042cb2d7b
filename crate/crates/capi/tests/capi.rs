//! Exercises the C ABI exactly as a foreign caller would: through raw
//! pointers and status codes, plus one real C program compiled against the
//! generated header and the static library.

use libc::c_char;
use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use xtalk_capi::*;

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

fn parse(text: &str) -> *mut XtalkNetlist {
    let text = CString::new(text).unwrap();
    let mut handle: *mut XtalkNetlist = ptr::null_mut();
    let status = unsafe { xtalk_netlist_parse(text.as_ptr(), &mut handle) };
    assert_eq!(status, XtalkStatus::Ok, "{}", last_error());
    assert!(!handle.is_null());
    handle
}

fn analyze(netlist: *const XtalkNetlist) -> *mut XtalkAnalysis {
    let mut handle: *mut XtalkAnalysis = ptr::null_mut();
    let status = unsafe { xtalk_analysis_new(netlist, &mut handle) };
    assert_eq!(status, XtalkStatus::Ok, "{}", last_error());
    handle
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(xtalk_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn take_string(ptr: *mut c_char) -> String {
    assert!(!ptr.is_null());
    let s = unsafe { CStr::from_ptr(ptr) }.to_string_lossy().into_owned();
    unsafe { xtalk_string_free(ptr) };
    s
}

#[test]
fn parse_analyze_ratio_roundtrip() {
    let netlist = parse(DIRECT_NETLIST);
    let analysis = analyze(netlist);

    let drive = CString::new("d").unwrap();
    let target = CString::new("1m").unwrap();
    let victim = CString::new("2m").unwrap();

    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe {
        xtalk_analysis_ratio(
            analysis,
            drive.as_ptr(),
            target.as_ptr(),
            victim.as_ptr(),
            &mut out,
        )
    };
    assert_eq!(status, XtalkStatus::Ok);
    assert_eq!(take_string(out), "1/28");

    let mut db = 0.0f64;
    let status = unsafe {
        xtalk_analysis_ratio_db(
            analysis,
            drive.as_ptr(),
            target.as_ptr(),
            victim.as_ptr(),
            &mut db,
        )
    };
    assert_eq!(status, XtalkStatus::Ok);
    assert!((db - (-28.943160626844385)).abs() < 1e-9);

    let mut rendered: *mut c_char = ptr::null_mut();
    let status = unsafe { xtalk_netlist_render(netlist, &mut rendered) };
    assert_eq!(status, XtalkStatus::Ok);
    assert_eq!(take_string(rendered), DIRECT_NETLIST);

    unsafe {
        xtalk_analysis_free(analysis);
        xtalk_netlist_free(netlist);
    }
}

#[test]
fn report_json_carries_exact_entries() {
    let netlist = parse(DIRECT_NETLIST);
    let analysis = analyze(netlist);
    let mut out: *mut c_char = ptr::null_mut();
    let status = unsafe { xtalk_analysis_report_json(analysis, ptr::null(), &mut out) };
    assert_eq!(status, XtalkStatus::Ok, "{}", last_error());
    let json = take_string(out);
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["crosstalk"][0]["target"], "1m");
    let entries = value["crosstalk"][0]["entries"].as_array().unwrap();
    let two_m = entries.iter().find(|e| e["victim"] == "2m").unwrap();
    assert_eq!(two_m["ratio"]["den"], "28");
    unsafe {
        xtalk_analysis_free(analysis);
        xtalk_netlist_free(netlist);
    }
}

#[test]
fn error_paths_set_status_and_message() {
    // malformed document
    let text = CString::new("node a\ncap a a 5\n").unwrap();
    let mut handle: *mut XtalkNetlist = ptr::null_mut();
    let status = unsafe { xtalk_netlist_parse(text.as_ptr(), &mut handle) };
    assert_eq!(status, XtalkStatus::ParseError);
    assert!(last_error().contains("line 2"));
    assert!(handle.is_null());

    // null inputs
    let status = unsafe { xtalk_netlist_parse(ptr::null(), &mut handle) };
    assert_eq!(status, XtalkStatus::InvalidArgument);
    let status = unsafe { xtalk_netlist_parse(text.as_ptr(), ptr::null_mut()) };
    assert_eq!(status, XtalkStatus::InvalidArgument);

    // singular circuit
    let floating = parse("node a b\ncap a b 5\n");
    let mut analysis: *mut XtalkAnalysis = ptr::null_mut();
    let status = unsafe { xtalk_analysis_new(floating, &mut analysis) };
    assert_eq!(status, XtalkStatus::SingularMatrix);
    assert!(last_error().contains("floating subcircuit"));
    unsafe { xtalk_netlist_free(floating) };

    // zero target weight and unknown coordinate
    let decoupled = parse(
        "node d 1 2 3 4\ncap d 1 0.1\ncap 1 2 70\ncap 3 4 70\ncap 1 gnd 50\ncap 2 gnd 50\ncap 3 gnd 50\ncap 4 gnd 50\njj 1 2 modes=1m/1p\njj 3 4 modes=2m/2p\ndrive d d\n",
    );
    let analysis = analyze(decoupled);
    let drive = CString::new("d").unwrap();
    let target = CString::new("2m").unwrap();
    let victim = CString::new("1m").unwrap();
    let mut db = 0.0f64;
    let status = unsafe {
        xtalk_analysis_ratio_db(
            analysis,
            drive.as_ptr(),
            target.as_ptr(),
            victim.as_ptr(),
            &mut db,
        )
    };
    assert_eq!(status, XtalkStatus::ZeroTargetWeight);
    let missing = CString::new("zz").unwrap();
    let good_target = CString::new("1m").unwrap();
    let status = unsafe {
        xtalk_analysis_ratio_db(
            analysis,
            drive.as_ptr(),
            good_target.as_ptr(),
            missing.as_ptr(),
            &mut db,
        )
    };
    assert_eq!(status, XtalkStatus::UnknownCoordinate);
    unsafe {
        xtalk_analysis_free(analysis);
        xtalk_netlist_free(decoupled);
    }
}

#[test]
fn zero_ratio_maps_to_negative_infinity() {
    let grounded_bus = parse(
        "node d 1 2 t 3 4\ncap d 1 0.1\ncap 1 2 70\ncap 3 4 70\ncap 1 gnd 50\ncap 2 gnd 50\ncap 3 gnd 50\ncap 4 gnd 50\ncap t gnd 80\ncap 1 t 4\ncap t 3 4\njj 1 2 modes=1m/1p\njj t gnd\njj 3 4 modes=2m/2p\ndrive d d\n",
    );
    let analysis = analyze(grounded_bus);
    let drive = CString::new("d").unwrap();
    let target = CString::new("1m").unwrap();
    let victim = CString::new("2m").unwrap();
    let mut db = 0.0f64;
    let status = unsafe {
        xtalk_analysis_ratio_db(
            analysis,
            drive.as_ptr(),
            target.as_ptr(),
            victim.as_ptr(),
            &mut db,
        )
    };
    assert_eq!(status, XtalkStatus::Ok);
    assert_eq!(db, f64::NEG_INFINITY);
    unsafe {
        xtalk_analysis_free(analysis);
        xtalk_netlist_free(grounded_bus);
    }
}

#[test]
fn version_is_exposed() {
    let version = unsafe { CStr::from_ptr(xtalk_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

/// Compile and run a real C program against the generated header and the
/// static library, checking the full foreign-caller path.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target_dir = std::env::var("CARGO_TARGET_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| manifest.join("../../target"));
    let staticlib = target_dir.join("debug").join("libxtalk_capi.a");
    assert!(
        staticlib.exists(),
        "static library not found at {}",
        staticlib.display()
    );
    let include_dir = manifest.join("include");

    let dir = tempfile::tempdir().unwrap();
    let c_path = dir.path().join("smoke.c");
    std::fs::write(
        &c_path,
        r#"
#include <stdio.h>
#include <string.h>
#include <math.h>
#include "xtalk.h"

int main(void) {
    const char *doc =
        "node d 1 2 3 4\n"
        "cap d 1 0.1\ncap 1 2 70\ncap 3 4 70\n"
        "cap 1 gnd 50\ncap 2 gnd 50\ncap 3 gnd 50\ncap 4 gnd 50\n"
        "cap 1 3 6\ncap 2 4 2\n"
        "jj 1 2 modes=1m/1p\njj 3 4 modes=2m/2p\n"
        "drive d d\n";
    XtalkNetlist *netlist = NULL;
    if (xtalk_netlist_parse(doc, &netlist) != XTALK_STATUS_OK) return 1;
    XtalkAnalysis *analysis = NULL;
    if (xtalk_analysis_new(netlist, &analysis) != XTALK_STATUS_OK) return 2;
    char *ratio = NULL;
    if (xtalk_analysis_ratio(analysis, "d", "1m", "2m", &ratio) != XTALK_STATUS_OK) return 3;
    if (strcmp(ratio, "1/28") != 0) return 4;
    xtalk_string_free(ratio);
    double db = 0.0;
    if (xtalk_analysis_ratio_db(analysis, "d", "1m", "2m", &db) != XTALK_STATUS_OK) return 5;
    if (fabs(db - (-28.943160626844385)) > 1e-9) return 6;
    xtalk_analysis_free(analysis);
    xtalk_netlist_free(netlist);
    printf("ok %s\n", xtalk_version());
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("smoke");
    let compile = Command::new("cc")
        .arg(&c_path)
        .arg(&staticlib)
        .arg(format!("-I{}", include_dir.display()))
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .output()
        .expect("cc available");
    assert!(
        compile.status.success(),
        "cc failed: {}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert!(
        run.status.success(),
        "smoke test exited {:?}",
        run.status.code()
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
