use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};
use std::path::{Path, PathBuf};

use opext::extremal::k_theta;
use opext::matcore::op_norm;
use opext::{Angle, CMatrix};
use opext_cli::io::to_json;
use opext_cli::MatrixFile;
use serde_json::Value;

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("opext").chain(args.iter().copied());
    let code = opext_cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn matrix_of(text: &str) -> CMatrix {
    serde_json::from_str::<MatrixFile>(text.trim()).unwrap().to_matrix().unwrap()
}

fn write_tmp(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn complete_zero_pair_matches_golden() {
    let (code, out, err) = run(&["complete", "--pair", &fixture("pair_zero.json"), "--k", &fixture("k_one.json")]);
    assert_eq!(code, 0, "{err}");
    let golden = std::fs::read_to_string(fixture("expected_complete_zero.json")).unwrap();
    assert_eq!(out, golden);
}

#[test]
fn complete_above_critical_angle_is_in_class() {
    let (code, out, _) = run(&["complete", "--pair", &fixture("pair_v06_u-06.json"), "--k", &fixture("k_zero.json"), "--phi", "1.2"]);
    assert_eq!(code, 0);
    let verdict: Value = serde_json::from_str(out.lines().nth(1).unwrap()).unwrap();
    assert_eq!(verdict["in_class"], true);
    assert!(verdict["margin"].as_f64().unwrap() >= 0.0);
}

#[test]
fn complete_below_critical_angle_exits_one() {
    let (code, out, _) = run(&["complete", "--pair", &fixture("pair_v06_u-06.json"), "--k", &fixture("k_zero.json"), "--phi", "0.9"]);
    assert_eq!(code, 1);
    let verdict: Value = serde_json::from_str(out.lines().nth(1).unwrap()).unwrap();
    assert_eq!(verdict["in_class"], false);
}

#[test]
fn complete_writes_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("t.json");
    let (code, out, _) = run(&[
        "complete",
        "--pair",
        &fixture("pair_zero.json"),
        "--k",
        &fixture("k_one.json"),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.is_empty());
    let t = matrix_of(&std::fs::read_to_string(&target).unwrap());
    assert_eq!(t[(1, 1)].re, 1.0);
}

#[test]
fn complete_rejects_bad_pair() {
    let dir = tempfile::tempdir().unwrap();
    let m = |x: f64| format!("{{\"rows\":1,\"cols\":1,\"data\":[[[{x},0]]]}}");
    let pair = write_tmp(dir.path(), "p.json", &format!("{{\"t11\":{},\"t21\":{},\"t12\":{}}}", m(0.9), m(0.9), m(0.0)));
    let (code, out, err) = run(&["complete", "--pair", pair.to_str().unwrap(), "--k", &fixture("k_zero.json")]);
    assert_eq!(code, 2);
    assert!(out.is_empty());
    assert!(err.contains("contraction"), "{err}");
}

#[test]
fn angle_examples() {
    let (_, out, _) = run(&["angle", "--pair", &fixture("pair_adjoint.json")]);
    assert_eq!(out.trim(), "0.000000000000");
    let (_, out, _) = run(&["angle", "--pair", &fixture("pair_v06_u-06.json")]);
    assert!(out.trim().starts_with("1.08083"), "{out}");
    assert!((out.trim().parse::<f64>().unwrap() - 2.0 * 0.6f64.atan()).abs() < 1e-11);
    let (code, out, _) = run(&["angle", "--pair", &fixture("pair_v1_u05.json")]);
    assert_eq!((code, out.trim()), (0, "pi/2-only"));
}

#[test]
fn check_examples() {
    let (code, out, _) = run(&["check", "--matrix", &fixture("hermitian_contraction.json"), "--phi", "0.3"]);
    assert_eq!(code, 0);
    let r: opext::ClassReport = serde_json::from_str(out.trim()).unwrap();
    assert!(r.in_class && r.kappa_plus == 0 && r.kappa_minus == 0);

    let (code, out, _) = run(&["check", "--matrix", &fixture("i_identity.json"), "--phi", &FRAC_PI_4.to_string()]);
    assert_eq!(code, 1);
    let r: opext::ClassReport = serde_json::from_str(out.trim()).unwrap();
    assert!(!r.in_class && r.kappa_plus >= 1);

    let dir = tempfile::tempdir().unwrap();
    let k = k_theta(0.7, Angle::new(FRAC_PI_3).unwrap());
    let path = write_tmp(dir.path(), "k.json", &to_json(&MatrixFile::from_matrix(&k)));
    let (code, _, _) = run(&["check", "--matrix", path.to_str().unwrap(), "--phi-deg", "60"]);
    assert_eq!(code, 0);
}

#[test]
fn check_requires_an_angle() {
    let (code, _, err) = run(&["check", "--matrix", &fixture("i_identity.json")]);
    assert_eq!(code, 2);
    assert!(err.contains("--phi"));
}

#[test]
fn cayley_and_short_examples() {
    let (code, out, _) = run(&["cayley", "--matrix", &fixture("scalar_zero.json")]);
    assert_eq!(code, 0);
    assert_eq!(out, std::fs::read_to_string(fixture("expected_cayley.json")).unwrap());

    let (_, out, _) = run(&["short", "--matrix", &fixture("short_2x2.json"), "--split", "1"]);
    let expected = matrix_of(&std::fs::read_to_string(fixture("expected_short.json")).unwrap());
    assert!(op_norm(&(matrix_of(&out) - &expected)) < 1e-12);
    assert!((expected[(1, 1)].re - 0.5).abs() < 1e-12);
}

#[test]
fn cayley_inverse_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let (_, fwd, _) = run(&["cayley", "--matrix", &fixture("hermitian_contraction.json")]);
    let p = write_tmp(dir.path(), "c.json", &fwd);
    let (_, back, _) = run(&["cayley", "--matrix", p.to_str().unwrap(), "--inverse"]);
    let orig = matrix_of(&std::fs::read_to_string(fixture("hermitian_contraction.json")).unwrap());
    assert!(op_norm(&(matrix_of(&back) - orig)) < 1e-12);
}

#[test]
fn hole_commands() {
    let (code, out, _) = run(&["hole", "singleton", "--hole", &fixture("hole_scalar.json")]);
    assert_eq!((code, out.trim()), (0, "true"));
    let (code, out, _) = run(&["hole", "member", "--hole", &fixture("hole_scalar.json"), "--matrix", &fixture("scalar_zero.json")]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["member"], true);
    let (code, _, _) = run(&["hole", "member", "--hole", &fixture("hole_scalar.json"), "--matrix", &fixture("k_one.json")]);
    assert_eq!(code, 1);
    let (code, out, _) = run(&["hole", "sample", "--hole", &fixture("hole_scalar.json"), "--count", "3"]);
    assert_eq!(code, 0);
    assert_eq!(serde_json::from_str::<Vec<MatrixFile>>(out.trim()).unwrap().len(), 3);
}

#[test]
fn extreme_k_theta() {
    let dir = tempfile::tempdir().unwrap();
    let k = k_theta(1.3, Angle::new(FRAC_PI_4).unwrap());
    let path = write_tmp(dir.path(), "k.json", &to_json(&MatrixFile::from_matrix(&k)));
    let (code, out, _) = run(&["extreme", "--matrix", path.to_str().unwrap(), "--phi", &FRAC_PI_4.to_string()]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["verdict"], "extreme_certified");

    let half = MatrixFile::from_matrix(&(k * opext::matcore::c(0.5, 0.0)));
    let path = write_tmp(dir.path(), "h.json", &to_json(&half));
    let (code, out, _) = run(&["extreme", "--matrix", path.to_str().unwrap(), "--phi", &FRAC_PI_4.to_string()]);
    assert_eq!(code, 1);
    let v: Value = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(v["verdict"], "not_extreme");
}

#[test]
fn tri_command_contractive_case() {
    let (code, out, _) = run(&[
        "tri",
        "--t11",
        &fixture("scalar_zero.json"),
        "--t22",
        &fixture("scalar_zero.json"),
        "--k",
        &fixture("k_one.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(matrix_of(out.lines().next().unwrap())[(0, 1)].re, 1.0);
}

#[test]
fn verify_small_run_and_unknown_suite() {
    let (code, out, _) = run(&["verify", "--suite", "balls", "--trials", "5", "--dims", "1"]);
    assert_eq!(code, 0);
    let r: opext::verify::RunReport = serde_json::from_str(out.trim()).unwrap();
    assert_eq!(r.failures, 0);
    let (code, _, err) = run(&["verify", "--suite", "bogus"]);
    assert_eq!(code, 2);
    assert!(err.contains("bogus"));
}

#[test]
fn verify_tol_override_can_fail_runs() {
    let (code, out, _) = run(&["verify", "--suite", "matcore", "--trials", "5", "--tol", "1e-30"]);
    let r: opext::verify::RunReport = serde_json::from_str(out.trim()).unwrap();
    assert!(r.failures > 0);
    assert_eq!(code, 1);
}

#[test]
fn env_tolerance_is_overridden_by_flag() {
    let exe = env!("CARGO_BIN_EXE_opext");
    let check = |flag: Option<&str>| {
        let mut cmd = std::process::Command::new(exe);
        cmd.env("OPEXT_TOL_PSD", "-1");
        if let Some(f) = flag {
            cmd.args(["--tol-psd", f]);
        }
        cmd.args(["check", "--matrix", &fixture("hermitian_contraction.json"), "--phi", "1"]);
        cmd.output().unwrap().status.code().unwrap()
    };
    assert_eq!(check(None), 2);
    assert_eq!(check(Some("1e-9")), 0);
}

#[test]
fn malformed_matrix_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = write_tmp(dir.path(), "bad.json", r#"{"rows":2,"cols":1,"data":[[[1,0]]]}"#);
    let (code, out, err) = run(&["cayley", "--matrix", p.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(out.is_empty() && err.contains("rows"));
}

#[test]
fn binary_is_deterministic() {
    let exe = env!("CARGO_BIN_EXE_opext");
    let go = || {
        std::process::Command::new(exe)
            .args(["--seed", "9", "verify", "--suite", "completion", "--trials", "10", "--dims", "3"])
            .output()
            .unwrap()
    };
    let (a, b) = (go(), go());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let (s1, s2) = (
        std::process::Command::new(exe).args(["hole", "sample", "--hole", &fixture("hole_scalar.json"), "--count", "4", "--seed", "3"]).output().unwrap(),
        std::process::Command::new(exe).args(["hole", "sample", "--hole", &fixture("hole_scalar.json"), "--count", "4", "--seed", "3"]).output().unwrap(),
    );
    assert_eq!(s1.stdout, s2.stdout);
}
