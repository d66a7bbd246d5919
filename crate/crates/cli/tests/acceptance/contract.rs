//! Exit-code and output contract of the binary.

use std::process::Command;

use crate::{code, json, tcert};

#[test]
fn certificate_passes_with_schema() {
    let o = tcert(&["certificate", "--n", "6"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o.stdout);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["n"], 6);
    assert_eq!(v["passed"], true);
    assert_eq!(v["nullspace_dim"], 0);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        &["bound", "--n", "5"][..],
        &["robustness", "--n", "5", "--trials", "4"][..],
        &["sweep", "--grid", "8x8"][..],
    ] {
        let a = tcert(args);
        let b = tcert(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert!(!a.stdout.is_empty());
    }
}

#[test]
fn floats_carry_seventeen_significant_digits() {
    let o = tcert(&["bound", "--n", "3"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("\"classical\":1.0000000000000000e0"), "{text}");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["bound", "--n", "2"][..],
        &["certificate", "--format", "csv"][..],
        &["sweep", "--grid", "4x4"][..],
        &["sweep", "--grid", "bogus"][..],
        &["robustness", "--eps", "-1"][..],
        &["robustness", "--trials", "0"][..],
        &["pdm", "--example", "bell9"][..],
        &["pdm"][..],
        &["nonsense"][..],
    ] {
        assert_eq!(code(&tcert(args)), 2, "{args:?}");
    }
}

#[test]
fn invalid_tolerance_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_tcert"))
        .args(["bound", "--n", "4"])
        .env("TEMPORAL_CERT_TOL", "-1e-8")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert_eq!(json(&o.stderr)["error"]["kind"], "usage");
}

#[test]
fn tolerance_from_environment_is_honoured() {
    let o = Command::new(env!("CARGO_BIN_EXE_tcert"))
        .args(["bound", "--n", "4"])
        .env("TEMPORAL_CERT_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let gap = json(&o.stdout)["gap"].as_f64().unwrap();
    assert!(gap <= 1e-6, "gap {gap}");
}

#[test]
fn failing_checks_are_named_on_stderr() {
    let o = tcert(&["robustness", "--n", "3"]);
    assert_eq!(code(&o), 1);
    let err = json(&o.stderr);
    assert_eq!(err["schema"], 1);
    assert_eq!(err["error"]["kind"], "check_failed");
    let names: Vec<&str> = err["error"]["failing_checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(names.contains(&"robustness.loglog_exponent"), "{names:?}");
    // The artifact is still produced.
    assert_eq!(json(&o.stdout)["n"], 3);
}

#[test]
fn out_writes_the_same_bytes_as_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let o = tcert(&["certificate", "--n", "4", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let written = std::fs::read(&path).unwrap();
    assert_eq!(written, tcert(&["certificate", "--n", "4"]).stdout);
    // Only the artifact remains; the temporary file was renamed.
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn csv_formats() {
    let o = tcert(&["sweep", "--grid", "8x8", "--format", "csv"]);
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("u,v,s3_max"));
    assert_eq!(lines.count(), 64);

    let o = tcert(&["robustness", "--n", "5", "--trials", "3", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 1 + 9);
}

#[test]
fn pdm_example_and_event_file() {
    let o = tcert(&["pdm", "--example", "rex"]);
    assert_eq!(code(&o), 0);
    let v = json(&o.stdout);
    assert_eq!(v["psd"], false);
    assert!((v["causality_monotone"].as_f64().unwrap() - 1.0).abs() < 1e-12);

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("events.json");
    std::fs::write(
        &path,
        r#"{"qubits":1,"state":[[[1,0],[0,0]],[[0,0],[0,0]]],
            "events":[{"qubit":0,"time":0},{"qubit":0,"time":1}]}"#,
    )
    .unwrap();
    let o = tcert(&["pdm", "--events", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let from_file = json(&o.stdout);
    assert_eq!(from_file["events"], 2);
    for (a, b) in from_file["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .zip(v["eigenvalues"].as_array().unwrap())
    {
        assert!((a.as_f64().unwrap() - b.as_f64().unwrap()).abs() < 1e-12);
    }
}

#[test]
fn malformed_input_files_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"dim\":2}").unwrap();
    let missing = dir.path().join("missing.json");
    for args in [
        vec!["bound", "--problem", bad.to_str().unwrap()],
        vec!["pdm", "--events", bad.to_str().unwrap()],
        vec!["bound", "--problem", missing.to_str().unwrap()],
    ] {
        let o = tcert(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        assert_eq!(json(&o.stderr)["error"]["kind"], "usage");
    }
}

#[test]
fn problem_file_matches_builtin_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.json");
    let problem = temporal_cert::ncycle::build(5).unwrap().problem();
    std::fs::write(&path, problem.to_json_string()).unwrap();
    let o = tcert(&["bound", "--problem", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let sdp = json(&o.stdout)["sdp"].as_f64().unwrap();
    assert!((sdp - 5.0 * (std::f64::consts::PI / 5.0).cos()).abs() < 1e-6);
}

#[test]
fn residual_commands_pass() {
    for args in [&["lemma1", "--count", "20"][..], &["isometry", "--count", "20"][..]] {
        let o = tcert(args);
        assert_eq!(code(&o), 0, "{args:?}");
        assert!(json(&o.stdout)["max_residual"].as_f64().unwrap() <= 1e-10);
    }
}

#[test]
fn report_lists_component_verdicts() {
    let o = tcert(&["report", "--n", "4", "--grid", "8x8"]);
    assert_eq!(code(&o), 1);
    let v = json(&o.stdout);
    assert_eq!(v["components"]["ncycle"], true);
    assert_eq!(v["components"]["qsim"], true);
    assert_eq!(v["verdict"], false);
}
