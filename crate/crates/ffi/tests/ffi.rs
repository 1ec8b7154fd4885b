//! Exercises the C ABI through the exported symbols.

use epiregion_ffi::*;
use std::ffi::{CStr, CString};
use std::ptr;

fn scenario_json() -> CString {
    CString::new(
        r#"{
        "domain": {"extents": [1.0], "nodes_per_axis": [32]},
        "diffusion": {"d1": 0.01, "alpha": 0.0},
        "kernel": {"family": "gaussian", "sigma": 0.1, "amplitude": 1.0},
        "model": {"kind": "controlled", "a11": 1.0, "a22": 1.0},
        "foi": {"family": "linear", "k": 2.0},
        "region": {"shape": "interval", "center": [0.5], "half_width": 0.12},
        "gamma": 5.0,
        "solver": {"dt": 0.05, "end_time": 1.0, "scheme": "backward-euler-diffusion"},
        "initial": {"kind": "constant", "values": [1.0, 1.0]}
    }"#,
    )
    .unwrap()
}

fn take_string(ptr: *mut libc::c_char) -> String {
    assert!(!ptr.is_null());
    let s = unsafe { CStr::from_ptr(ptr) }.to_str().unwrap().to_string();
    unsafe { epi_string_free(ptr) };
    s
}

#[test]
fn parse_run_and_free() {
    let json = scenario_json();
    let mut handle: *mut EpiScenario = ptr::null_mut();
    let status = unsafe { epi_scenario_parse(json.as_ptr(), &mut handle) };
    assert_eq!(status, EpiStatus::Ok);
    assert!(!handle.is_null());

    let digest1 = take_string(unsafe { epi_scenario_digest(handle) });
    let digest2 = take_string(unsafe { epi_scenario_digest(handle) });
    assert_eq!(digest1, digest2);
    assert_eq!(digest1.len(), 64);

    let command = CString::new("eigen").unwrap();
    let method = CString::new("both").unwrap();
    let mut out: *mut libc::c_char = ptr::null_mut();
    let status = unsafe {
        epi_run(
            handle,
            command.as_ptr(),
            method.as_ptr(),
            ptr::null(),
            ptr::null(),
            &mut out,
        )
    };
    assert_eq!(status, EpiStatus::Ok);
    let summary = take_string(out);
    let parsed: serde_json::Value = serde_json::from_str(&summary).unwrap();
    let records = parsed["records"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    let delta = parsed["delta"].as_f64().unwrap();
    assert!(delta <= 1e-2);

    // Full artifact map contains the eigenvector CSV.
    let mut all: *mut libc::c_char = ptr::null_mut();
    let status = unsafe {
        epi_run_artifacts(
            handle,
            command.as_ptr(),
            method.as_ptr(),
            ptr::null(),
            ptr::null(),
            &mut all,
        )
    };
    assert_eq!(status, EpiStatus::Ok);
    let artifacts: serde_json::Value = serde_json::from_str(&take_string(all)).unwrap();
    assert!(artifacts["eigenvector_direct.csv"]
        .as_str()
        .unwrap()
        .starts_with("node,x,phi"));

    unsafe { epi_scenario_free(handle) };
}

#[test]
fn invalid_scenario_reports_validation_error() {
    let json = CString::new(r#"{"domain": {"extents": [1.0]}}"#).unwrap();
    let mut handle: *mut EpiScenario = ptr::null_mut();
    let status = unsafe { epi_scenario_parse(json.as_ptr(), &mut handle) };
    assert_eq!(status, EpiStatus::Validation);
    assert!(handle.is_null());
    let message = take_string(epi_last_error());
    assert!(message.contains("parse error"), "{message}");
}

#[test]
fn hypothesis_violations_surface_through_the_abi() {
    let json = scenario_json()
        .into_string()
        .unwrap()
        .replace("\"amplitude\": 1.0", "\"amplitude\": -1.0");
    let json = CString::new(json).unwrap();
    let mut handle: *mut EpiScenario = ptr::null_mut();
    let status = unsafe { epi_scenario_parse(json.as_ptr(), &mut handle) };
    assert_eq!(status, EpiStatus::Validation);
    let message = take_string(epi_last_error());
    assert!(message.contains("H2"), "{message}");
}

#[test]
fn null_arguments_are_rejected() {
    let mut handle: *mut EpiScenario = ptr::null_mut();
    let status = unsafe { epi_scenario_parse(ptr::null(), &mut handle) };
    assert_eq!(status, EpiStatus::NullArgument);

    let json = scenario_json();
    let status = unsafe { epi_scenario_parse(json.as_ptr(), ptr::null_mut()) };
    assert_eq!(status, EpiStatus::NullArgument);

    unsafe { epi_string_free(ptr::null_mut()) };
    unsafe { epi_scenario_free(ptr::null_mut()) };
}

#[test]
fn version_is_exposed() {
    let version = unsafe { CStr::from_ptr(epi_version()) }.to_str().unwrap();
    assert_eq!(version, env!("CARGO_PKG_VERSION"));
}

#[test]
fn generated_header_covers_the_surface() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/epiregion.h"
    ))
    .expect("generated header exists");
    for symbol in [
        "epi_scenario_parse",
        "epi_scenario_free",
        "epi_scenario_digest",
        "epi_run",
        "epi_run_artifacts",
        "epi_last_error",
        "epi_string_free",
        "epi_version",
        "EpiStatus",
        "EpiScenario",
    ] {
        assert!(header.contains(symbol), "header misses {symbol}");
    }
}
