use std::f64::consts::PI;
use std::io::Write;
use std::process::{Command, Output, Stdio};

const SUBCOMMANDS: [&str; 8] = [
    "density",
    "normalize",
    "sample",
    "check-chart",
    "dim",
    "reynolds",
    "orbit-moments",
    "chart-change",
];

fn haar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haar")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn every_subcommand_documents_its_flags() {
    for sub in SUBCOMMANDS {
        let out = haar(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        let text = stdout(&out);
        assert!(text.contains(&format!("Usage: haar {sub}")), "{sub}: {text}");
        assert!(text.contains("--out"), "{sub} lacks --out");
    }
    let top = stdout(&haar(&["--help"]));
    for sub in SUBCOMMANDS {
        assert!(top.contains(sub), "top-level help misses {sub}");
    }
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(haar(&["bogus"]).status.code(), Some(1));
    assert_eq!(haar(&["dim", "--group", "so3", "--order", "8", "--wat"]).status.code(), Some(1));
    assert_eq!(haar(&["dim", "--group", "so7", "--order", "8"]).status.code(), Some(1));
    assert_eq!(haar(&[]).status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two() {
    let out = haar(&["dim", "--group", "so3", "--order", "20", "--method", "quadrature", "--nodes", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("under-resolved"));
}

#[test]
fn dim_prints_table_value() {
    let out = haar(&["dim", "--group", "so3", "--order", "8"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "91");
    let v = json(&haar(&["dim", "--group", "o3", "--order", "4", "--method", "both", "--nodes", "16"]));
    assert_eq!(v["closed"], 3);
    assert!((v["quadrature"].as_f64().unwrap() - 3.0).abs() < 1e-9);
}

#[test]
fn closed_form_density_at_equator() {
    let v = json(&haar(&[
        "density",
        "--chart",
        "builtin:so3-euler",
        "--point",
        "0,1.5707963,0",
        "--closed-form",
    ]));
    let expected = 1.5707963f64.sin() / (8.0 * PI * PI);
    assert!((v["density"].as_f64().unwrap() - expected).abs() < 1e-15);
}

#[test]
fn sampling_is_byte_identical_per_seed() {
    let args = ["sample", "--group", "so3", "--chart", "quaternion", "-n", "3", "--seed", "7"];
    let a = haar(&args);
    let b = haar(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 3);
    let other = haar(&["sample", "--group", "so3", "--chart", "quaternion", "-n", "3", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn out_flag_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.csv");
    let args = ["sample", "--group", "o3", "--chart", "euler", "-n", "5", "--seed", "1", "--format", "csv"];
    let direct = haar(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let redirected = haar(&with_out);
    assert!(redirected.status.success());
    assert!(redirected.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    for line in stdout(&direct).lines() {
        assert_eq!(line.split(',').count(), 9);
    }
}

#[test]
fn reynolds_reads_tensor_from_stdin() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_haar"))
        .args(["reynolds", "--group", "so3", "--tensor", "-", "--nodes", "16"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(br#"{"dim":3,"order":2,"entries":[1,0,0,0,2,0,0,0,3]}"#)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    let v = json(&out);
    let entries: Vec<f64> = v["entries"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (k, x) in entries.iter().enumerate() {
        let expected = if k % 4 == 0 { 2.0 } else { 0.0 };
        assert!((x - expected).abs() < 1e-9, "entry {k}: {x}");
    }
}

#[test]
fn check_chart_reports_ok_for_builtin() {
    let out = haar(&["check-chart", "builtin:so2-angle"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("status         ok"));
}

#[test]
fn malformed_chart_is_a_usage_error_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.chart");
    std::fs::write(&path, "chart broken {\n    params: a in [0, 1];\n    matrix: [[a, 0], [0 1]];\n}\n").unwrap();
    let out = haar(&["check-chart", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("broken.chart:3:"), "{err}");
}

#[test]
fn chart_change_shift_balances_densities() {
    let v = json(&haar(&[
        "chart-change",
        "--from",
        "builtin:so2-angle",
        "--to",
        "builtin:so2-shifted",
        "--point",
        "1.0",
        "--map",
        "shift:-3.141592653589793",
    ]));
    assert!(v["residual"].as_f64().unwrap() < 1e-9);
    assert!((v["mapped"][0].as_f64().unwrap() - (1.0 - PI)).abs() < 1e-15);
}

#[test]
fn orbit_moments_emit_all_fields() {
    let v = json(&haar(&[
        "orbit-moments",
        "--group",
        "so3",
        "--diag",
        "1,2,3",
        "--samples",
        "2000",
        "--seed",
        "4",
        "--nodes",
        "16",
    ]));
    for key in ["m1", "m2", "cov", "mc_stderr"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let m1 = v["m1"]["entries"].as_array().unwrap();
    assert!((m1[4].as_f64().unwrap() - 2.0).abs() < 1e-9);
}
