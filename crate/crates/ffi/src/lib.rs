//! C ABI for the epiregion toolkit.
//!
//! Scenarios are passed as JSON strings in the same schema the command-line
//! tool reads; results come back as JSON (or CSV bundled in JSON) strings.
//! Handles are opaque; every returned string must be released with
//! [`epi_string_free`]. All functions are safe to call from any thread, and
//! panics are caught and reported as `EPI_STATUS_PANIC`.

use epiregion::control::{CertifyMode, DomainFlag};
use epiregion::runner::{self, EigenMethodChoice};
use epiregion::scenario::{exit_code_for, BuiltScenario, Scenario};
use libc::c_char;
use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

/// Status codes returned by every fallible entry point. The validation and
/// numerical codes match the exit codes of the `epiregion` binary.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpiStatus {
    Ok = 0,
    Validation = 2,
    Numerical = 3,
    NullArgument = 4,
    InvalidUtf8 = 5,
    Panic = 6,
}

/// Opaque handle to a parsed and validated scenario.
pub struct EpiScenario {
    scenario: Scenario,
    built: BuiltScenario,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: String) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).ok();
    });
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// Last error message of the current thread, or NULL when none was
/// recorded. Free with [`epi_string_free`].
#[no_mangle]
pub extern "C" fn epi_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|s| s.clone().into_raw())
            .unwrap_or(std::ptr::null_mut())
    })
}

/// Crate version as a static string; do not free.
#[no_mangle]
pub extern "C" fn epi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by an `epi_*` function (or
/// NULL) and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn epi_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn read_utf8<'a>(ptr: *const c_char) -> Result<&'a str, EpiStatus> {
    if ptr.is_null() {
        return Err(EpiStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_last_error("argument is not valid UTF-8".into());
        EpiStatus::InvalidUtf8
    })
}

fn guard<F: FnOnce() -> EpiStatus>(f: F) -> EpiStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic".into());
            EpiStatus::Panic
        }
    }
}

/// Parses and validates a scenario from a JSON string. On success stores a
/// handle in `out`; release it with [`epi_scenario_free`]. File references
/// inside the scenario resolve against the current working directory.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn epi_scenario_parse(
    json: *const c_char,
    out: *mut *mut EpiScenario,
) -> EpiStatus {
    if out.is_null() {
        return EpiStatus::NullArgument;
    }
    let text = match read_utf8(json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guard(|| {
        let scenario: Scenario = match serde_json::from_str(text) {
            Ok(s) => s,
            Err(e) => {
                set_last_error(format!("scenario parse error: {e}"));
                return EpiStatus::Validation;
            }
        };
        match scenario.build(Path::new(".")) {
            Ok(built) => {
                *out = Box::into_raw(Box::new(EpiScenario { scenario, built }));
                EpiStatus::Ok
            }
            Err(e) => {
                set_last_error(e.to_string());
                EpiStatus::Validation
            }
        }
    })
}

/// Releases a scenario handle.
///
/// # Safety
/// `scenario` must come from [`epi_scenario_parse`] (or be NULL) and not yet
/// be freed.
#[no_mangle]
pub unsafe extern "C" fn epi_scenario_free(scenario: *mut EpiScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Content digest (hex SHA-256 of the canonical serialized scenario).
/// Returns NULL on a NULL handle. Free with [`epi_string_free`].
///
/// # Safety
/// `scenario` must be a live handle from [`epi_scenario_parse`].
#[no_mangle]
pub unsafe extern "C" fn epi_scenario_digest(scenario: *const EpiScenario) -> *mut c_char {
    if scenario.is_null() {
        return std::ptr::null_mut();
    }
    to_c_string((*scenario).scenario.digest())
}

unsafe fn run_impl(
    scenario: *const EpiScenario,
    command: *const c_char,
    method: *const c_char,
    mode: *const c_char,
    domain_flag: *const c_char,
    all_artifacts: bool,
    out_json: *mut *mut c_char,
) -> EpiStatus {
    if scenario.is_null() || out_json.is_null() {
        return EpiStatus::NullArgument;
    }
    let command = match read_utf8(command) {
        Ok(c) => c,
        Err(status) => return status,
    };
    let parse_opt = |ptr: *const c_char, fallback: &'static str| -> Result<String, EpiStatus> {
        if ptr.is_null() {
            Ok(fallback.to_string())
        } else {
            read_utf8(ptr).map(str::to_string)
        }
    };
    let method = match parse_opt(method, "direct") {
        Ok(m) => m,
        Err(status) => return status,
    };
    let mode = match parse_opt(mode, "homogeneous") {
        Ok(m) => m,
        Err(status) => return status,
    };
    let flag = match parse_opt(domain_flag, "whole") {
        Ok(f) => f,
        Err(status) => return status,
    };

    let method = match method.parse::<EigenMethodChoice>() {
        Ok(m) => m,
        Err(e) => {
            set_last_error(e);
            return EpiStatus::Validation;
        }
    };
    let mode = match mode.as_str() {
        "homogeneous" => CertifyMode::Homogeneous,
        "periodic" => CertifyMode::Periodic,
        other => {
            set_last_error(format!("unknown mode '{other}'"));
            return EpiStatus::Validation;
        }
    };
    let flag = match flag.as_str() {
        "whole" => DomainFlag::Whole,
        "region" => DomainFlag::RegionOnly,
        other => {
            set_last_error(format!("unknown domain flag '{other}'"));
            return EpiStatus::Validation;
        }
    };

    let handle = &*scenario;
    guard(|| {
        match runner::run_subcommand(&handle.scenario, &handle.built, command, method, mode, flag)
        {
            Ok(output) => {
                let payload = if all_artifacts {
                    let map: serde_json::Map<String, serde_json::Value> = output
                        .artifacts
                        .iter()
                        .map(|a| (a.name.clone(), serde_json::Value::String(a.contents.clone())))
                        .collect();
                    serde_json::Value::Object(map).to_string()
                } else {
                    output.summary_json
                };
                *out_json = to_c_string(payload);
                EpiStatus::Ok
            }
            Err(e) => {
                set_last_error(e.to_string());
                if exit_code_for(&e) == 2 {
                    EpiStatus::Validation
                } else {
                    EpiStatus::Numerical
                }
            }
        }
    })
}

/// Runs a subcommand (`simulate`, `eigen`, `certify`, `optimize-region`,
/// `compare-eigen`) on a parsed scenario and stores its JSON summary in
/// `out_json`. `method`, `mode` and `domain_flag` accept the same values as
/// the command-line flags and may be NULL for the defaults.
///
/// # Safety
/// `scenario` must be a live handle; string arguments must be
/// NUL-terminated or NULL where documented; `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn epi_run(
    scenario: *const EpiScenario,
    command: *const c_char,
    method: *const c_char,
    mode: *const c_char,
    domain_flag: *const c_char,
    out_json: *mut *mut c_char,
) -> EpiStatus {
    run_impl(scenario, command, method, mode, domain_flag, false, out_json)
}

/// As [`epi_run`], but stores a JSON object mapping every produced artifact
/// file name to its contents (CSV files included).
///
/// # Safety
/// Same contract as [`epi_run`].
#[no_mangle]
pub unsafe extern "C" fn epi_run_artifacts(
    scenario: *const EpiScenario,
    command: *const c_char,
    method: *const c_char,
    mode: *const c_char,
    domain_flag: *const c_char,
    out_json: *mut *mut c_char,
) -> EpiStatus {
    run_impl(scenario, command, method, mode, domain_flag, true, out_json)
}
