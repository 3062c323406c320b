use std::path::Path;
use std::process::{Command, Output};

fn sectio(args: &[&str], envs: &[(&str, &str)]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sectio"))
        .args(args)
        .envs(envs.iter().copied())
        .output()
        .expect("sectio runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn volume_prints_nine_significant_digits() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "v.json",
        r#"{"dimension": 3, "bodies": [{"kind": "lp", "p": 2}], "densities": [{"kind": "lebesgue"}]}"#,
    );
    let out = sectio(&["volume", "--config", &cfg], &[]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "body,density,measure\nB_2^3,lebesgue,4.18879020e0\n"
    );
}

#[test]
fn out_flag_writes_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "b.json",
        r#"{"dimension": 3, "bodies": [{"kind": "lp", "p": 1}], "reference": {"kind": "lp", "p": 1},
            "direction_count": 4, "ratio_p": [1, "inf"]}"#,
    );
    let target = dir.path().join("bounds.json");
    let out = sectio(&["bounds", "--config", &cfg, "--out", target.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(target).unwrap()).unwrap();
    assert_eq!(report["directions"], 4);
    assert_eq!(report["volume_ratios"][3]["p"], "inf");
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = [
        r#"{"dimension": 3, "bodies": [{"kind": "lp", "p": 2}], "colour": 1}"#,
        r#"{"dimension": 1, "bodies": [{"kind": "lp", "p": 2}]}"#,
        r#"{"dimension": 3, "bodies": [{"kind": "lp", "p": -1}]}"#,
        r#"{"dimension": 3, "bodies": [{"kind": "ellipsoid", "semi_axes": [1, 2]}]}"#,
        "not json",
    ];
    for (i, text) in bad.iter().enumerate() {
        let cfg = write(dir.path(), &format!("bad{i}.json"), text);
        let out = sectio(&["volume", "--config", &cfg], &[]);
        assert_eq!(out.status.code(), Some(2), "case {i}");
    }
    assert_eq!(sectio(&["volume"], &[]).status.code(), Some(2));
    let ok = write(
        dir.path(),
        "ok.json",
        r#"{"dimension": 3, "bodies": [{"kind": "lp", "p": 2}], "densities": [{"kind": "lebesgue"}]}"#,
    );
    let out = sectio(&["volume", "--config", &ok], &[("SECTIO_THREADS", "zero")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn positive_definite_kernel_refuses_a_counterexample() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"dimension": 5, "bodies": [{"kind": "lp", "p": 2}], "densities": [{"kind": "lebesgue"}]}"#,
    );
    let out = sectio(&["counterexample", "--config", &cfg], &[]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("positive definite"));
}

#[test]
fn pdtest_reports_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", r#"{"dimension": 3, "bodies": [{"kind": "lp", "p": 1}]}"#);
    let out = sectio(&["pdtest", "--config", &cfg, "--max-degree", "6"], &[]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["positive_definite"], true);
    assert_eq!(report["max_degree"], 6);
}

#[test]
fn selftest_passes() {
    let out = sectio(&["--selftest"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS")).count(), 6);
}
