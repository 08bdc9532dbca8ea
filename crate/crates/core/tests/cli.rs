use std::path::Path;
use std::process::{Command, Output};

use rank1_hankel::io::read_matrix;

fn r1h(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_r1h")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn field(text: &str, key: &str) -> Vec<f64> {
    let line = text
        .lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"));
    line.split_whitespace().map(|v| v.parse().unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn approx_fits_all_ones() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ones.txt", "2 2\n1 0\n1 0\n1 0\n1 0\n");
    let out_path = dir.path().join("h.txt");
    let out = r1h(&["approx", &input, "--out", out_path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let z = field(&text, "z_hat");
    let c = field(&text, "c_hat");
    assert!((z[0] - 1.0).abs() < 1e-12 && z[1].abs() < 1e-12, "{text}");
    assert!((c[0] - 2.0).abs() < 1e-9 && c[1].abs() < 1e-9, "{text}");
    assert!(field(&text, "residual")[0] < 1e-9);
    let h = read_matrix(&out_path).unwrap();
    assert_eq!(h.shape(), (2, 2));
    assert!(h.as_slice().iter().all(|v| (v.re - 1.0).abs() < 1e-9 && v.im.abs() < 1e-9));
}

#[test]
fn approx_l1_toeplitz() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "x.txt", "2 3\n1 0\n2 0\n4 0\n0.5 0\n1 0\n2 0\n");
    let out = r1h(&[
        "approx",
        &input,
        "--norm",
        "l1",
        "--structure",
        "toeplitz",
        "--delta-rho",
        "0.0625",
        "--delta-phi",
        "0.1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("structure = Toeplitz"), "{text}");
    assert!(field(&text, "residual")[0] < 1e-6, "{text}");
}

#[test]
fn doa_simulated_scene() {
    let out = r1h(&["doa", "--m", "16", "--theta0", "-20", "--snr", "20", "--methods", "r1h_l2,r1h_l1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    for method in ["r1h_l2", "r1h_l1"] {
        let line = text.lines().find(|l| l.starts_with(&format!("{method}:"))).unwrap();
        let theta: f64 = line.split_whitespace().nth(1).unwrap().parse().unwrap();
        assert!((theta + 20.0).abs() < 1.0, "{line}");
    }
}

#[test]
fn selftest_passes() {
    let out = r1h(&["selftest"]);
    assert!(out.status.success(), "{}{}", stdout(&out), String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.txt");
    assert_eq!(r1h(&["approx", missing.to_str().unwrap()]).status.code(), Some(1));

    let bad = write(dir.path(), "bad.toml", "schema_version = 7\n");
    assert_eq!(r1h(&["bench", "--config", &bad]).status.code(), Some(1));

    let zero = write(dir.path(), "zero.txt", "2 2\n0 0\n0 0\n0 0\n0 0\n");
    assert_eq!(r1h(&["approx", &zero]).status.code(), Some(2));

    assert_eq!(r1h(&["doa", "--methods", "esprit"]).status.code(), Some(1));
}
