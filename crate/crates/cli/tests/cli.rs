use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ultradiff"))
        .args(args)
        .current_dir(dir)
        .env_remove("ULTRADIFF_CONFIG")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json report")
}

#[test]
fn gevrey_is_almost_increasing() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["seq", "check", "--family", "gevrey", "--s", "1", "--check", "almost-increasing"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "HOLDS_UP_TO");
    assert_eq!(v["schema"], "ultradiff.report/1");
    assert_eq!(v["config"]["truncation"], 4096);
}

#[test]
fn polygon_refuted_with_sparse_witness() {
    let d = tempfile::tempdir().unwrap();
    let out = run(
        d.path(),
        &["seq", "check", "--family", "appendix-a", "--check", "almost-increasing", "--sparse-witness"],
    );
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["status"], "REFUTED");
    assert!(v["result"]["witness"]["log_value"].as_f64().unwrap() >= 16f64.ln() - 1.0);
}

#[test]
fn missing_file_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["seq", "check", "--file", "absent.json", "--check", "almost-increasing"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_json_reports_position() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.json"), "{\n  \"label\": \"x\",\n  \"log_terms\": [0.0, 1.0,,]\n}\n").unwrap();
    let out = run(d.path(), &["seq", "check", "--file", "bad.json", "--check", "weakly-log-convex"]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");
}

#[test]
fn bad_flag_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["seq", "check", "--family", "nope", "--check", "almost-increasing"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn exported_sequence_roundtrips_through_check() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["--K", "256", "--out", "g.json", "seq", "export", "--family", "gevrey", "--s", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("g.json")).unwrap()).unwrap();
    std::fs::write(d.path().join("seq.json"), report["result"].to_string()).unwrap();
    let out = run(d.path(), &["--K", "256", "seq", "check", "--file", "seq.json", "--check", "weakly-log-convex"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn mcirc_csv_columns() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["--K", "32", "--format", "csv", "fdb", "mcirc", "--family", "gevrey", "--s", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# ultradiff.csv/1 table=mcirc"));
    assert_eq!(lines.next(), Some("k,log_Mk,log_Mcirc_k,stat"));
    assert_eq!(lines.count(), 32);
}

#[test]
fn omega_matrix_pipeline_writes_matrix() {
    let d = tempfile::tempdir().unwrap();
    let out = run(
        d.path(),
        &["--K", "200", "--out", "report.json", "pipeline", "omega-matrix", "--family", "power", "--s", "2", "--rhos", "0.5,1,2"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let m: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("omega_matrix.json")).unwrap()).unwrap();
    assert_eq!(m["rows"].as_array().unwrap().len(), 3);
}

#[test]
fn ode_bound_pipeline_passes() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["--out", "r.json", "pipeline", "ode-bound", "--field", "xsq", "--K", "40"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let cert: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("certificate.json")).unwrap()).unwrap();
    for key in ["kind", "C", "rho", "sequence_label", "shift"] {
        assert!(cert.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn lemma4_demo_writes_both_sequences() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["--K", "512", "--out", "r.json", "pipeline", "lemma4", "--demo"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(d.path().join("N1.json").exists());
    assert!(d.path().join("N2.json").exists());
}

#[test]
fn crosscheck_against_jet_file() {
    let d = tempfile::tempdir().unwrap();
    let out = run(d.path(), &["--K", "20", "--out", "geo.json", "oracle", "ode-xsq"]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(d.path().join("geo.json")).unwrap()).unwrap();
    std::fs::write(d.path().join("jet.json"), report["result"].to_string()).unwrap();
    let ok = run(
        d.path(),
        &["--K", "20", "pipeline", "oracle-crosscheck", "--C", "1", "--rho", "1", "--family", "gevrey", "--s", "0", "--jet", "jet.json"],
    );
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let tight = run(
        d.path(),
        &["--K", "20", "pipeline", "oracle-crosscheck", "--C", "1", "--rho", "0.5", "--family", "gevrey", "--s", "0", "--jet", "jet.json"],
    );
    assert_eq!(tight.status.code(), Some(1));
}

#[test]
fn config_file_and_env_var() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("cfg.json"), "{\"truncation\": 128}").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_ultradiff"))
        .args(["seq", "check", "--family", "gevrey", "--check", "root-to-infinity"])
        .current_dir(d.path())
        .env("ULTRADIFF_CONFIG", "cfg.json")
        .output()
        .unwrap();
    assert_eq!(json(&out)["config"]["truncation"], 128);
    let out = run(d.path(), &["--config", "cfg.json", "--K", "64", "seq", "check", "--family", "gevrey", "--check", "root-to-infinity"]);
    assert_eq!(json(&out)["config"]["truncation"], 64);
}

#[test]
fn reports_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let args = ["--K", "512", "fdb", "check", "--family", "sawtooth"];
    let a = run(d.path(), &args);
    let b = run(d.path(), &args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), Some(1));
}
