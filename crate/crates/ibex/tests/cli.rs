//! Black-box tests of the `ibex` binary: exit codes, output formats,
//! manifest sidecars, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn ibex(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ibex"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen_identity(dir: &Path, n: &str) -> String {
    let path = dir.join("joint.csv");
    let p = path.to_str().unwrap().to_string();
    let out = ibex(&["gen", "deterministic-identity", n, "--out", &p], dir);
    assert!(out.status.success());
    p
}

#[test]
fn usage_error_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ibex(&["solve", "--no-such-flag"], tmp.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_file_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ibex(&["info", "--joint", "does-not-exist.csv"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn malformed_joint_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.csv");
    std::fs::write(&bad, "0.5,0.6\n0.1,0.1\n").unwrap();
    let out = ibex(&["info", "--joint", bad.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn help_exits_0() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ibex(&["--help"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn info_reports_identity_quantities() {
    let tmp = tempfile::tempdir().unwrap();
    let joint = gen_identity(tmp.path(), "4");
    let out = ibex(&["info", "--joint", &joint], tmp.path());
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("I(X;Y) = 2"), "unexpected info output: {text}");
}

#[test]
fn map_reproduces_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ibex(
        &[
            "map",
            "--family",
            "shexp:200:2",
            "--slope",
            "1",
            "--beta",
            "1",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let r: f64 = stdout(&out).trim().parse().unwrap();
    assert!((r - 1.9735).abs() < 1e-3, "map gave {r}");
}

#[test]
fn range_without_curve_uses_bound() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ibex(&["range", "--family", "exp:1"], tmp.path());
    assert!(out.status.success());
    assert_eq!(stdout(&out).trim(), "[0, 1]");
}

#[test]
fn sweep_is_byte_deterministic_and_writes_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let joint = gen_identity(tmp.path(), "4");
    let args = |out: &str| {
        vec![
            "sweep".to_string(),
            "--joint".into(),
            joint.clone(),
            "--family".into(),
            "pow:1".into(),
            "--auto".into(),
            "--deterministic".into(),
            "2".into(),
            "--seed".into(),
            "9".into(),
            "--out".into(),
            out.into(),
        ]
    };
    for name in ["a.csv", "b.csv"] {
        let argv = args(name);
        let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
        let out = ibex(&argv, tmp.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(tmp.path().join("a.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("b.csv")).unwrap();
    assert_eq!(a, b, "same seed must give identical bytes");

    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with(
        "family,param1,param2,beta_u,i_xt_bits,i_ty_bits,objective,outer_iters,converged,support_t"
    ));
    assert_eq!(text.lines().count(), 21, "header plus 20 rows");

    let manifest = tmp.path().join("a.csv.manifest.json");
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(manifest).unwrap()).unwrap();
    assert_eq!(doc["command"], "sweep");
    assert_eq!(doc["seed"], 9);
}

#[test]
fn solve_writes_json_with_encoder() {
    let tmp = tempfile::tempdir().unwrap();
    let joint = gen_identity(tmp.path(), "4");
    let out_path = tmp.path().join("solve.json");
    let out = ibex(
        &[
            "solve",
            "--joint",
            &joint,
            "--family",
            "pow:1",
            "--beta",
            "0.5",
            "--seed",
            "3",
            "--out",
            out_path.to_str().unwrap(),
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["family"], "pow:1");
    assert_eq!(doc["encoder"].as_array().unwrap().len(), 4);
    assert!(doc["converged"].as_bool().unwrap());
}

#[test]
fn estimate_and_cluster_read_sample_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let samples = tmp.path().join("samples.csv");
    let mut body = String::new();
    for _ in 0..20 {
        body.push_str("0.0,0.0\n");
    }
    for _ in 0..20 {
        body.push_str("100.0,0.0\n");
    }
    std::fs::write(&samples, body).unwrap();

    let est = ibex(&["estimate", "--samples", samples.to_str().unwrap()], tmp.path());
    assert!(est.status.success());
    let mi: f64 = stdout(&est).trim().parse().unwrap();
    assert!((mi - 1.0).abs() < 1e-6, "two equal clusters carry 1 bit, got {mi}");

    let clu = ibex(
        &[
            "cluster",
            "--samples",
            samples.to_str().unwrap(),
            "--eps",
            "1.0",
            "--min-pts",
            "5",
        ],
        tmp.path(),
    );
    assert!(clu.status.success());
    assert_eq!(stdout(&clu).trim(), "2");
}

#[test]
fn aim_reports_deviation() {
    let tmp = tempfile::tempdir().unwrap();
    let joint = gen_identity(tmp.path(), "4");
    let out = ibex(
        &[
            "aim", "--joint", &joint, "--r-star", "1.0", "--eta", "50", "--beta", "1",
        ],
        tmp.path(),
    );
    assert!(out.status.success());
    assert!(stdout(&out).contains("r_star=1"));
}
