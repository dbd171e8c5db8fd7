//! End-to-end runs of the `ncd` binary.

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn ncd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncd"))
        .args(args)
        .output()
        .unwrap()
}

fn ncd_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ncd"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn report(doc: &str) -> Value {
    let out = ncd_stdin(&["report", "-"], doc);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn number_state_report_is_exact() {
    let r = report(r#"{"kind":"number","ns":[1]}"#);
    assert!((r["exact"].as_f64().unwrap() - (1.0 - (-1f64).exp())).abs() < 1e-10);
    assert_eq!(r["state_id"], "number[1]");
    assert!(r["lowers"]
        .as_array()
        .unwrap()
        .iter()
        .any(|b| b["provenance"] == "husimi-pure-lower"));
}

#[test]
fn even_cat_report_is_an_interval() {
    let r = report(r#"{"kind":"cat","parity":"even","beta":2}"#);
    assert!(r["exact"].is_null());
    let (lo, hi) = (
        r["best_lower"].as_f64().unwrap(),
        r["best_upper"].as_f64().unwrap(),
    );
    assert!(lo < hi && hi <= 0.5);
}

#[test]
fn coherent_state_has_zero_distance() {
    let r = report(r#"{"kind":"coherent","alpha":[[1,0]]}"#);
    for key in ["best_lower", "best_upper", "exact"] {
        assert!(r[key].as_f64().unwrap().abs() < 1e-9, "{key}: {}", r[key]);
    }
    for b in r["lowers"].as_array().unwrap() {
        assert!(b["value"].as_f64().unwrap().abs() < 1e-9, "{b}");
    }
}

#[test]
fn report_from_file_with_truncation_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("state.json");
    std::fs::write(&path, r#"{"kind":"noon","n":2,"c":[[0.6,0],[0,0.8]]}"#).unwrap();
    let out = ncd(&[
        "report",
        path.to_str().unwrap(),
        "--trunc",
        "3",
        "--tail-tol",
        "1e-10",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    let want = 1.0 - 2.0 * (-2f64).exp() * 0.64;
    assert!((r["best_lower"].as_f64().unwrap() - want).abs() < 1e-9);
}

#[test]
fn exit_codes() {
    let out = ncd_stdin(
        &["report", "-"],
        r#"{"kind":"cat","parity":"odd","beta":"big"}"#,
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/beta"));

    let out = ncd_stdin(
        &["report", "-", "--trunc", "5"],
        r#"{"kind":"cat","parity":"even","beta":2}"#,
    );
    assert_eq!(
        out.status.code(),
        Some(3),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let out = ncd(&["report", "/nonexistent/state.json"]);
    assert_eq!(out.status.code(), Some(5));

    let out = ncd(&["verify", "--only", "gaussian"]);
    assert_ne!(out.status.code(), Some(0));
}

#[test]
fn qsup_prints_the_supremum() {
    let out = ncd_stdin(&["qsup", "-"], r#"{"kind":"number","ns":[2]}"#);
    assert!(out.status.success());
    let q: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((q["value"].as_f64().unwrap() - 2.0 * (-2f64).exp()).abs() < 1e-9);
    assert_eq!(q["method"], "multistart");
}

fn rows(csv: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = csv.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let data = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, data)
}

#[test]
fn figures_are_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = ncd(&["figure", "fig1", "--out", p.to_str().unwrap()]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    let (x, y) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(!text.contains('\r'));
    let (header, data) = rows(&text);
    assert_eq!(
        header,
        [
            "beta",
            "alpha_star",
            "lb_q",
            "ub_q",
            "d_sigma_beta",
            "d_sigma_alphastar"
        ]
    );
    assert_eq!(data.len(), 60);
    for r in &data {
        assert!(r[2] <= r[3].min(r[4]).min(r[5]) + 1e-8);
    }
    let script = std::fs::read_to_string(dir.path().join("a.plot.py")).unwrap();
    assert!(script.contains("\"a.csv\""));
}

#[test]
fn fig2_and_fig3_columns() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("f2.csv");
    let out = ncd(&[
        "figure",
        "fig2",
        "--out",
        p.to_str().unwrap(),
        "--steps",
        "7",
    ]);
    assert!(out.status.success());
    let (header, data) = rows(&std::fs::read_to_string(&p).unwrap());
    assert_eq!(header.last().unwrap(), "d_phase_randomized");
    assert_eq!(data.len(), 7);

    let p = dir.path().join("f3.csv");
    let out = ncd(&["figure", "fig3", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    let (header, data) = rows(&std::fs::read_to_string(&p).unwrap());
    assert_eq!(
        header,
        ["eta", "lb_1", "ub_1", "lb_2", "ub_2", "lb_3", "ub_3", "lb_4", "ub_4"]
    );
    assert_eq!(data.len(), 101);
    for r in &data {
        for k in 0..4 {
            assert!(r[1 + 2 * k] <= r[2 + 2 * k] + 1e-8);
        }
    }
    let last = data.last().unwrap();
    let want = 1.0 - 2.0 * (-2f64).exp();
    assert_eq!(last[0], 1.0);
    assert!((last[3] - want).abs() < 1e-12 && (last[4] - want).abs() < 1e-12);

    let out = ncd(&[
        "figure",
        "fig3",
        "--out",
        p.to_str().unwrap(),
        "--steps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_filters() {
    let out = ncd(&["verify", "--only", "number"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for n in 1..=6 {
        assert!(text.contains(&format!("|{n}>) = 1 - gamma_{n}")), "{text}");
    }
    assert!(text.contains("0 failing check(s)"));
    let out = ncd(&["verify", "--only", "noon"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}
