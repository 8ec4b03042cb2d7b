//! C ABI for the xtalk engine.
//!
//! Handles are opaque; every constructor has a matching `_free`, and every
//! returned string is owned by the caller until passed to
//! `xtalk_string_free`. Functions return a status code; on failure a
//! thread-local message is available through `xtalk_last_error`.
//!
//! Status codes match the CLI exit-code contract: 2 parse error, 3 singular
//! capacitance matrix, 4 zero target weight.

use libc::c_char;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use xtalk::crosstalk::{self, CrosstalkError, CrosstalkReport};
use xtalk::netlist::{self, Netlist};
use xtalk::quantize::{self, Analysis};
use xtalk::report::AnalysisReport;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XtalkStatus {
    Ok = 0,
    /// Null pointer, invalid UTF-8, or an argument outside its domain.
    InvalidArgument = 1,
    /// Netlist text failed to parse or validate.
    ParseError = 2,
    /// Singular capacitance matrix (floating subcircuit).
    SingularMatrix = 3,
    /// The requested target coordinate carries zero drive weight.
    ZeroTargetWeight = 4,
    /// A coordinate label does not exist in the reduced system.
    UnknownCoordinate = 5,
    /// Unexpected internal failure.
    Internal = 6,
}

/// Opaque parsed netlist.
pub struct XtalkNetlist {
    inner: Netlist,
}

/// Opaque analysis: the full pipeline output for one netlist.
pub struct XtalkAnalysis {
    netlist: Netlist,
    analysis: Analysis,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: XtalkStatus, message: &str) -> XtalkStatus {
    set_error(message);
    status
}

fn crosstalk_status(error: &CrosstalkError) -> XtalkStatus {
    match error {
        CrosstalkError::ZeroTargetWeight(_) => XtalkStatus::ZeroTargetWeight,
        CrosstalkError::UnknownCoordinate(_) => XtalkStatus::UnknownCoordinate,
        CrosstalkError::Quantize(_) => XtalkStatus::SingularMatrix,
        CrosstalkError::Netlist(_) => XtalkStatus::ParseError,
        _ => XtalkStatus::InvalidArgument,
    }
}

fn guard(body: impl FnOnce() -> XtalkStatus) -> XtalkStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(XtalkStatus::Internal, "internal panic"),
    }
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, XtalkStatus> {
    if ptr.is_null() {
        return Err(fail(
            XtalkStatus::InvalidArgument,
            &format!("{what} pointer is null"),
        ));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        fail(
            XtalkStatus::InvalidArgument,
            &format!("{what} is not valid UTF-8"),
        )
    })
}

fn write_string(out: *mut *mut c_char, value: String) -> XtalkStatus {
    if out.is_null() {
        return fail(XtalkStatus::InvalidArgument, "output pointer is null");
    }
    let c = match CString::new(value) {
        Ok(c) => c,
        Err(_) => return fail(XtalkStatus::Internal, "output contained a NUL byte"),
    };
    unsafe { *out = c.into_raw() };
    XtalkStatus::Ok
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn xtalk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message for the most recent failure on this thread; valid until the next
/// failing call on the same thread. Do not free.
#[no_mangle]
pub extern "C" fn xtalk_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parse a netlist document. On success stores a handle in `out`.
/// # Safety
/// `text` must be a valid NUL-terminated string and `out` a valid
/// location to store the handle.
#[no_mangle]
pub unsafe extern "C" fn xtalk_netlist_parse(
    text: *const c_char,
    out: *mut *mut XtalkNetlist,
) -> XtalkStatus {
    guard(|| {
        if out.is_null() {
            return fail(XtalkStatus::InvalidArgument, "output pointer is null");
        }
        let text = match read_str(text, "netlist text") {
            Ok(t) => t,
            Err(status) => return status,
        };
        match netlist::parse(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(XtalkNetlist { inner }));
                XtalkStatus::Ok
            }
            Err(e) => fail(XtalkStatus::ParseError, &e.to_string()),
        }
    })
}

/// Render a netlist back to its document form.
/// # Safety
/// `handle` must come from `xtalk_netlist_parse` and not be freed.
#[no_mangle]
pub unsafe extern "C" fn xtalk_netlist_render(
    handle: *const XtalkNetlist,
    out: *mut *mut c_char,
) -> XtalkStatus {
    guard(|| {
        let Some(handle) = handle.as_ref() else {
            return fail(XtalkStatus::InvalidArgument, "netlist handle is null");
        };
        write_string(out, netlist::render(&handle.inner))
    })
}

/// # Safety
/// `handle` must come from `xtalk_netlist_parse`; passing it again after
/// this call is undefined.
#[no_mangle]
pub unsafe extern "C" fn xtalk_netlist_free(handle: *mut XtalkNetlist) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Run the full pipeline on a parsed netlist.
/// # Safety
/// `netlist` must be a live handle from `xtalk_netlist_parse` and `out` a
/// valid location to store the handle.
#[no_mangle]
pub unsafe extern "C" fn xtalk_analysis_new(
    netlist: *const XtalkNetlist,
    out: *mut *mut XtalkAnalysis,
) -> XtalkStatus {
    guard(|| {
        if out.is_null() {
            return fail(XtalkStatus::InvalidArgument, "output pointer is null");
        }
        let Some(handle) = netlist.as_ref() else {
            return fail(XtalkStatus::InvalidArgument, "netlist handle is null");
        };
        match quantize::analyze(&handle.inner) {
            Ok(analysis) => {
                *out = Box::into_raw(Box::new(XtalkAnalysis {
                    netlist: handle.inner.clone(),
                    analysis,
                }));
                XtalkStatus::Ok
            }
            Err(e) => fail(XtalkStatus::SingularMatrix, &e.to_string()),
        }
    })
}

/// # Safety
/// `handle` must come from `xtalk_analysis_new`; passing it again after
/// this call is undefined.
#[no_mangle]
pub unsafe extern "C" fn xtalk_analysis_free(handle: *mut XtalkAnalysis) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

fn resolve_target(
    handle: &XtalkAnalysis,
    target: *const c_char,
) -> Result<String, XtalkStatus> {
    if target.is_null() {
        return crosstalk::default_target(&handle.analysis.reduced).ok_or_else(|| {
            fail(
                XtalkStatus::InvalidArgument,
                "circuit has no non-drive coordinates to target",
            )
        });
    }
    unsafe { read_str(target, "target label").map(str::to_owned) }
}

/// Full analysis report as a JSON document. `target` selects the ratio
/// denominator; pass NULL for the default (the first qubit mode).
/// # Safety
/// `handle` must be a live analysis handle; `target`, when non-NULL, must
/// be NUL-terminated; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn xtalk_analysis_report_json(
    handle: *const XtalkAnalysis,
    target: *const c_char,
    out: *mut *mut c_char,
) -> XtalkStatus {
    guard(|| {
        let Some(handle) = handle.as_ref() else {
            return fail(XtalkStatus::InvalidArgument, "analysis handle is null");
        };
        let target = match resolve_target(handle, target) {
            Ok(t) => t,
            Err(status) => return status,
        };
        let mut reports: Vec<CrosstalkReport> = Vec::new();
        for port in handle.netlist.drives() {
            match crosstalk::report(
                &handle.analysis.reduced,
                &port.name,
                &port.source_node,
                &target,
            ) {
                Ok(r) => reports.push(r),
                Err(e) => return fail(crosstalk_status(&e), &e.to_string()),
            }
        }
        let report =
            AnalysisReport::build(&handle.netlist, &handle.analysis, &reports, None, None);
        write_string(out, report.to_json())
    })
}

/// Exact crosstalk ratio as a `p/q` string.
/// # Safety
/// `handle` must be a live analysis handle; the label strings must be
/// NUL-terminated; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn xtalk_analysis_ratio(
    handle: *const XtalkAnalysis,
    drive: *const c_char,
    target: *const c_char,
    victim: *const c_char,
    out: *mut *mut c_char,
) -> XtalkStatus {
    guard(|| {
        let Some(handle) = handle.as_ref() else {
            return fail(XtalkStatus::InvalidArgument, "analysis handle is null");
        };
        let (drive, target, victim) = match (
            read_str(drive, "drive label"),
            read_str(target, "target label"),
            read_str(victim, "victim label"),
        ) {
            (Ok(d), Ok(t), Ok(v)) => (d, t, v),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        match crosstalk::ratio(&handle.analysis.reduced, drive, target, victim) {
            Ok(r) => write_string(out, format!("{}/{}", r.numer(), r.denom())),
            Err(e) => fail(crosstalk_status(&e), &e.to_string()),
        }
    })
}

/// Crosstalk strength in dB; an exact zero ratio yields -INFINITY.
/// # Safety
/// `handle` must be a live analysis handle; the label strings must be
/// NUL-terminated; `out` must be a valid location.
#[no_mangle]
pub unsafe extern "C" fn xtalk_analysis_ratio_db(
    handle: *const XtalkAnalysis,
    drive: *const c_char,
    target: *const c_char,
    victim: *const c_char,
    out: *mut f64,
) -> XtalkStatus {
    guard(|| {
        if out.is_null() {
            return fail(XtalkStatus::InvalidArgument, "output pointer is null");
        }
        let Some(handle) = handle.as_ref() else {
            return fail(XtalkStatus::InvalidArgument, "analysis handle is null");
        };
        let (drive, target, victim) = match (
            read_str(drive, "drive label"),
            read_str(target, "target label"),
            read_str(victim, "victim label"),
        ) {
            (Ok(d), Ok(t), Ok(v)) => (d, t, v),
            (Err(s), _, _) | (_, Err(s), _) | (_, _, Err(s)) => return s,
        };
        match crosstalk::ratio(&handle.analysis.reduced, drive, target, victim) {
            Ok(r) => {
                *out = crosstalk::to_db(&r);
                XtalkStatus::Ok
            }
            Err(e) => fail(crosstalk_status(&e), &e.to_string()),
        }
    })
}

/// Free a string returned by this library.
/// # Safety
/// `s` must be a string returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn xtalk_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
