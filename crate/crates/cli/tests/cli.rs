use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn opmap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opmap")).args(args).env_remove("OPMAP_DEFAULT_TOL").output().expect("run opmap")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_exit_codes() {
    let kraus = spec("kraus_amplitude_damping.json");
    let theta = spec("transpose_tensor_m2.json");
    assert_eq!(code(&opmap(&["check", path_str(&kraus), "--notion", "type2", "--n", "2"])), 0);
    let out = opmap(&["check", path_str(&theta), "--notion", "type2", "--n", "2"]);
    assert_eq!(code(&out), 1);
    let report = json(&out);
    assert_eq!(report["verdict"], "violated");
    assert!(report["witness"].is_array());
    assert_eq!(code(&opmap(&["check", path_str(&theta), "--notion", "type2(1)", "--trials", "200"])), 0);
    assert_eq!(code(&opmap(&["check", path_str(&theta), "--notion", "type2", "--n", "0"])), 2);
    assert_eq!(code(&opmap(&["check", path_str(&theta), "--notion", "type2"])), 2);
    assert_eq!(code(&opmap(&["check", "/nonexistent.json", "--notion", "monotone"])), 2);
}

#[test]
fn malformed_spec_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind":"kraus","params":{"operators":[[[[1,0]],[[0,0],[1,0]]]]}}"#).unwrap();
    let out = opmap(&["check", path_str(&bad), "--notion", "type2(1)"]);
    assert_eq!(code(&out), 2);
    assert!(!out.stderr.is_empty());
}

#[test]
fn csv_summary_has_fixed_columns() {
    let out = opmap(&["check", path_str(&spec("transpose_tensor_m2.json")), "--notion", "type2(2)", "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("check,verdict,margin,seed,trials"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "violated");
    assert_eq!(row[3], "50593");
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("report.json");
    let out = opmap(&["check", path_str(&spec("kraus_amplitude_damping.json")), "--notion", "choi_exact", "--out", path_str(&target)]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v["verdict"], "certified_positive");
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let theta = spec("transpose_tensor_m2.json");
    let args = |t: &'static str| {
        opmap(&["check", path_str(&theta), "--notion", "type2(1)", "--trials", "700", "--seed", "9", "--threads", t]).stdout
    };
    assert_eq!(args("1"), args("8"));
}

#[test]
fn decompose_paths() {
    let out = opmap(&["decompose", path_str(&spec("tracial_linear_m2.json"))]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["residual"].as_f64().unwrap() <= 1e-9);
    assert_eq!(v["verdict"], "decomposed");
    assert_eq!(code(&opmap(&["decompose", path_str(&spec("kraus_amplitude_damping.json"))])), 2);
    let out = opmap(&["decompose", path_str(&spec("trace_square_m2.json")), "-D", "2", "--samples", "10"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["components"].as_array().unwrap().contains(&serde_json::json!([2, 0])));
    assert!(v["residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn uncertainty_paths() {
    let out = opmap(&["uncertainty", path_str(&spec("schrodinger_state_bundle.json"))]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v.as_array().unwrap().len(), 2);
    assert!(v[0]["margin"].as_f64().unwrap() >= -1e-12);

    let out = opmap(&["uncertainty", path_str(&spec("transpose_vc.json"))]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert!(v[0]["margin"].as_f64().unwrap() < -0.5);
    assert_eq!(v[0]["witness"].as_array().unwrap().len(), 2);

    assert_eq!(code(&opmap(&["uncertainty", path_str(&spec("transpose_vc.json")), "--checks", "nosuch"])), 2);
    // Transpose does not have a commutative range.
    assert_eq!(code(&opmap(&["uncertainty", path_str(&spec("transpose_vc.json")), "--checks", "schrodinger"])), 2);
}

#[test]
fn gallery_commands() {
    let out = opmap(&["gallery", "list"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out).as_array().unwrap().len(), 10);
    let out = opmap(&["gallery", "run", "theta_transpose_tensor"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["checks"][0]["report"]["verdict"], "violated");
    assert_eq!(code(&opmap(&["gallery", "run", "nosuch"])), 2);
    assert_eq!(code(&opmap(&["gallery", "run", "theta_positive", "--param", "bogus=1"])), 2);
    let out = opmap(&["gallery", "run", "hadamard_power_threshold", "--param", "m=2", "--param", "n=1", "--param", "alpha=0.5", "--trials", "500"]);
    assert_eq!(code(&out), 0);
    let out = opmap(&["gallery", "all", "--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
    assert_eq!(json(&out)["passed"], true);
}

#[test]
fn fuzz_finds_hadamard_violation() {
    let out = opmap(&["fuzz", path_str(&spec("hadamard_power_m3_half.json")), "--notions", "type2(1)", "--budget", "10000"]);
    assert_eq!(code(&out), 1);
    let v = json(&out);
    assert_eq!(v["violation"], true);
    assert!(v["states"][0]["witness"].is_array());
}

#[test]
fn fuzz_cp_map_writes_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("cp.json");
    let out = opmap(&[
        "fuzz",
        path_str(&spec("kraus_amplitude_damping.json")),
        "--notions",
        "type2(1),type1(2)",
        "--budget",
        "100000",
        "--round",
        "25000",
        "--checkpoint",
        path_str(&cp),
    ]);
    assert_eq!(code(&out), 0);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&cp).unwrap()).unwrap();
    assert_eq!(saved["cursor"], 100000);
    assert_eq!(saved["tol"]["psd_tol"], 1e-9);
    assert!(!dir.path().join("cp.json.tmp").exists());
}

#[test]
fn resume_continues_the_same_trial_stream() {
    let dir = tempfile::tempdir().unwrap();
    let spec = spec("kraus_amplitude_damping.json");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let run = |cp: &Path, budget: &str, extra: &[&str]| {
        let mut args = vec!["fuzz", path_str(&spec), "--notions", "type2(1),type1(2)", "--round", "300", "--budget", budget];
        args.extend_from_slice(&["--checkpoint", path_str(cp)]);
        args.extend_from_slice(extra);
        opmap(&args)
    };
    let whole = run(&a, "900", &[]);
    assert_eq!(run(&b, "600", &[]).status.code(), Some(0));
    let resumed = run(&b, "900", &[]);
    assert_eq!(code(&whole), code(&resumed));
    assert_eq!(whole.stdout, resumed.stdout);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());

    let refused = run(&b, "1200", &["--tol", "1e-6"]);
    assert_eq!(code(&refused), 2);
    assert!(String::from_utf8_lossy(&refused.stderr).contains("refusing to resume"));
    let refused = run(&b, "1200", &["--seed", "1"]);
    assert_eq!(code(&refused), 2);
}

#[test]
fn default_tolerance_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let cp = dir.path().join("cp.json");
    let bin = env!("CARGO_BIN_EXE_opmap");
    let spec = spec("kraus_amplitude_damping.json");
    let base = [
        "fuzz",
        path_str(&spec),
        "--notions",
        "type2(1)",
        "--budget",
        "10",
        "--checkpoint",
        path_str(&cp),
    ];
    let out = Command::new(bin).args(base).env("OPMAP_DEFAULT_TOL", "1e-6").output().unwrap();
    assert_eq!(code(&out), 0);
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(&cp).unwrap()).unwrap();
    assert_eq!(saved["tol"]["psd_tol"], 1e-6);
    let out = Command::new(bin).args(["check", path_str(&spec), "--notion", "monotone"]).env("OPMAP_DEFAULT_TOL", "abc").output().unwrap();
    assert_eq!(code(&out), 2);
}
