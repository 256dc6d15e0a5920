//! End-to-end checks of the binary: golden eval output, config handling,
//! exit codes and byte-level determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_higherspin"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_higherspin"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs")
}

#[test]
fn eval_euclidean_golden() {
    let out = run(&[
        "eval", "--manifold", "euclidean", "--m", "5", "--k", "2",
        "--x", "2,0,0,0,0", "--u", "0,1,0,0,0", "--v", "0,1,0,0,0",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["value"]["coeffs"]["0"], 0.625);
    assert_eq!(doc["value"]["dim"], 5);
    assert!(doc["spec"]["params"].is_object());
}

#[test]
fn eval_cylinder_r0_equals_euclidean_bit_exact() {
    let args_common = [
        "--m", "5", "--k", "2",
        "--x", "0.3,0.4,0.25,0.5,0.1", "--u", "1,0,0,0,0", "--v", "0,1,0,0,0",
    ];
    let mut a = vec!["eval", "--manifold", "euclidean"];
    a.extend_from_slice(&args_common);
    let mut b = vec!["eval", "--manifold", "cylinder", "--l", "1", "--radius", "0"];
    b.extend_from_slice(&args_common);
    let ea = run(&a);
    let eb = run(&b);
    assert!(ea.status.success() && eb.status.success());
    let da: serde_json::Value = serde_json::from_slice(&ea.stdout).unwrap();
    let db: serde_json::Value = serde_json::from_slice(&eb.stdout).unwrap();
    assert_eq!(da["value"], db["value"], "single-term truncation must match");
}

#[test]
fn malformed_rank_exits_2_with_error_json() {
    let out = run(&[
        "eval", "--manifold", "cylinder", "--m", "5", "--k", "2", "--l", "4",
        "--x", "0.3,0.4,0.2,0.5,0.1", "--u", "1,0,0,0,0", "--v", "0,1,0,0,0",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["error"].as_str().unwrap().contains("l<=m-k"));
}

#[test]
fn singular_point_exits_3() {
    let out = run(&[
        "eval", "--manifold", "cylinder", "--m", "5", "--k", "2", "--l", "1",
        "--radius", "2",
        "--x", "1,0,0,0,0", "--u", "1,0,0,0,0", "--v", "0,1,0,0,0",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "singularity");
}

#[test]
fn unknown_check_exits_2() {
    let out = run(&["verify", "--m", "5", "--check", "no-such-check"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn perturbed_negative_control_exits_1() {
    let out = run(&[
        "verify", "--m", "5", "--k", "2", "--check", "annihilation-perturbed",
        "--points", "4", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(1), "negative control must fail");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], false);
}

#[test]
fn verify_default_suite_m5_passes() {
    let out = run(&["verify", "--m", "5", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["pass"], true);
    assert!(doc["reports"].as_array().unwrap().len() >= 4);
}

#[test]
fn verify_annihilation_passes() {
    let out = run(&[
        "verify", "--m", "5", "--k", "2", "--check", "annihilation",
        "--points", "5", "--seed", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn config_file_with_flag_override() {
    let dir = std::env::temp_dir().join("higherspin_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("cfg.json");
    std::fs::write(
        &cfg,
        r#"{"manifold":"euclidean","m":5,"k":1,"c1":1.0}"#,
    )
    .unwrap();
    // flag --k 2 overrides the config's k = 1
    let out = run(&[
        "eval", "--config", cfg.to_str().unwrap(), "--k", "2",
        "--x", "2,0,0,0,0", "--u", "0,1,0,0,0", "--v", "0,1,0,0,0",
    ]);
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["spec"]["params"]["k"], 2);
    assert_eq!(doc["value"]["coeffs"]["0"], 0.625);
}

#[test]
fn sweep_radius_defects_decrease() {
    let out = run(&[
        "sweep", "--kind", "radius", "--m", "6", "--k", "1", "--l", "1",
        "--radii", "4,8,16",
        "--x", "0.37,0.21,-0.4,0.5,0.11,-0.6",
        "--u", "0.2,-1,0.4,0,0.3,0.1",
        "--v", "1,0.2,0,0.5,-0.2,0",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "parameter,defect,fitted_exponent");
    let defects: Vec<f64> = lines
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(defects.len(), 3);
    assert!(defects.windows(2).all(|w| w[1] < w[0]), "{defects:?}");
}

#[test]
fn sweep_empty_radii_exits_2() {
    let out = run(&[
        "sweep", "--kind", "radius", "--m", "6", "--k", "1", "--l", "1",
        "--radii", "",
        "--x", "0.3,0.2,0.1,0.5,0.1,0.6",
        "--u", "1,0,0,0,0,0", "--v", "0,1,0,0,0,0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sweep_hopf_geometric_ratio() {
    let out = run(&[
        "sweep", "--kind", "hopf-n", "--m", "5", "--k", "1", "--t", "2", "--N", "5",
        "--x", "1.2,0.3,-0.4,0.5,0.1", "--y", "0.4,0.3,0.2,-0.1,0.3",
        "--u", "1,0,0,0,0", "--v", "0,1,0,0,0",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 5);
    let norms: Vec<f64> = rows
        .iter()
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // per-step ratio close to t^{-(m-k)} = 2^-4
    for w in norms.windows(2) {
        let ratio = w[1] / w[0];
        assert!((ratio / 0.0625 - 1.0).abs() < 0.02, "ratio {ratio}");
    }
    let exponent: f64 = rows[0].split(',').nth(2).unwrap().parse().unwrap();
    assert!((exponent + 4.0).abs() < 0.1, "exponent {exponent}");
}

#[test]
fn byte_identical_reruns_and_thread_counts() {
    let args = [
        "verify", "--m", "5", "--k", "2", "--check", "annihilation",
        "--points", "6", "--seed", "42",
    ];
    let a = run_with_threads(&args, "1");
    let b = run_with_threads(&args, "4");
    let c = run_with_threads(&args, "1");
    assert_eq!(a.stdout, b.stdout, "thread count must not change output");
    assert_eq!(a.stdout, c.stdout, "reruns must be byte-identical");
    assert_eq!(a.status.code(), b.status.code());

    let eval_args = [
        "eval", "--manifold", "hopf", "--m", "5", "--k", "1", "--t", "2", "--N", "3",
        "--x", "1.2,0.3,-0.4,0.5,0.1", "--y", "0.4,0.3,0.2,-0.1,0.3",
        "--u", "1,0,0,0,0", "--v", "0,1,0,0,0",
    ];
    let a = run(&eval_args);
    let b = run(&eval_args);
    assert_eq!(a.stdout, b.stdout);
}
