//! End-to-end checks of the command-line tool through the built binary.

use std::path::Path;
use std::process::Command;

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epiregion"))
}

fn write_scenario(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn reference_scenario() -> String {
    r#"{
        "domain": {"extents": [1.0], "nodes_per_axis": [64]},
        "diffusion": {"d1": 0.01, "alpha": 0.0},
        "kernel": {"family": "gaussian", "sigma": 0.1, "amplitude": 1.0},
        "model": {"kind": "controlled", "a11": 1.0, "a22": 1.0},
        "foi": {"family": "linear", "k": 2.0},
        "region": {"shape": "interval", "center": [0.5], "half_width": 0.1},
        "gamma": 5.0,
        "solver": {"dt": 0.05, "end_time": 2.0, "scheme": "backward-euler-diffusion", "snapshot_stride": 20},
        "initial": {"kind": "gaussian-bump", "center": [0.3], "width": 0.06, "height": 1.0}
    }"#
    .to_string()
}

fn temp_dir(tag: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("epiregion-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn eigen_both_methods_agree_and_exit_zero() {
    let dir = temp_dir("eigen");
    let scenario = write_scenario(&dir, "ref.json", &reference_scenario());
    let out = dir.join("out");
    let result = binary()
        .args(["eigen", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .args(["--method", "both"])
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("eigen.json")).unwrap()).unwrap();
    let records = summary["records"].as_array().unwrap();
    assert_eq!(records.len(), 2);
    let lambda = records[0]["lambda"].as_f64().unwrap();
    let delta = summary["delta"].as_f64().unwrap();
    assert!(delta <= 1e-2 * lambda.abs().max(1.0));
}

#[test]
fn decoupled_scenario_certifies_zero_stabilizable() {
    // No infection feedback at all: the kernel amplitude is zero, so decay
    // plus diffusion certify stabilizability outright.
    let dir = temp_dir("certify");
    let body = reference_scenario().replace(
        r#""kernel": {"family": "gaussian", "sigma": 0.1, "amplitude": 1.0}"#,
        r#""kernel": {"family": "delta", "amplitude": 0.0}"#,
    );
    let scenario = write_scenario(&dir, "decoupled.json", &body);
    let out = dir.join("out");
    let result = binary()
        .arg("certify")
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let record: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("certify.json")).unwrap()).unwrap();
    assert_eq!(record["verdict"], "zero-stabilizable");
    assert!(record["lambda_complement"].as_f64().unwrap() > 0.0);
}

#[test]
fn identical_scenarios_reproduce_identical_output_hashes() {
    let dir = temp_dir("determinism");
    let scenario = write_scenario(&dir, "ref.json", &reference_scenario());
    let mut records = Vec::new();
    for run in ["a", "b"] {
        let out = dir.join(run);
        let result = binary()
            .arg("simulate")
            .arg("--scenario")
            .arg(&scenario)
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert!(result.status.success(), "{result:?}");
        let record: serde_json::Value = serde_json::from_str(
            &std::fs::read_to_string(out.join("run_record.json")).unwrap(),
        )
        .unwrap();
        records.push(record);
    }
    assert_eq!(records[0]["scenario_digest"], records[1]["scenario_digest"]);
    assert_eq!(records[0]["outputs"], records[1]["outputs"]);
}

#[test]
fn validation_failures_exit_two_with_machine_readable_error() {
    let dir = temp_dir("validation");
    let body = reference_scenario().replace("\"dt\": 0.05", "\"dt\": 0.9");
    let scenario = write_scenario(&dir, "bad.json", &body);
    let result = binary()
        .arg("simulate")
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .unwrap();
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    let error: serde_json::Value = serde_json::from_str(stderr.trim()).unwrap();
    assert_eq!(error["error"]["exit"], 2);
    assert!(error["error"]["message"]
        .as_str()
        .unwrap()
        .contains("positivity bound"));
}

#[test]
fn sweep_writes_one_directory_per_scenario_and_report_merges() {
    let dir = temp_dir("sweep");
    let first = write_scenario(&dir, "one.json", &reference_scenario());
    let second = write_scenario(
        &dir,
        "two.json",
        &reference_scenario().replace("\"gamma\": 5.0", "\"gamma\": 8.0"),
    );
    let out = dir.join("out");
    let result = binary()
        .arg("eigen")
        .arg("--scenario")
        .arg(&first)
        .arg("--scenario")
        .arg(&second)
        .arg("--out")
        .arg(&out)
        .args(["--jobs", "2"])
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    assert!(out.join("one/eigen.json").exists());
    assert!(out.join("two/eigen.json").exists());

    let report_out = dir.join("report");
    let result = binary()
        .arg("report")
        .arg(out.join("one"))
        .arg(out.join("two"))
        .arg("--out")
        .arg(&report_out)
        .output()
        .unwrap();
    assert!(result.status.success(), "{result:?}");
    let csv = std::fs::read_to_string(report_out.join("summary.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3);
    assert!(csv.lines().nth(1).unwrap().contains("eigen"));
}
