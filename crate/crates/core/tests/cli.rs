use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_levy-heat"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').filter_map(|v| v.parse().ok()).collect())
        .collect()
}

#[test]
fn density_output_carries_header_and_gaussian_peak() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d.csv");
    let cfg = config("gauss.json");
    let o = run(&[
        "density",
        "--config",
        cfg.to_str().unwrap(),
        "--t",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# levy-heat "));
    assert!(text.contains("# config-sha256 "));
    let peak = data_rows(&text).iter().map(|r| r[1]).fold(0.0, f64::max);
    assert!((peak - 0.282_094_791_8).abs() < 1e-9);
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = config("cp1.json");
    let args = [
        "rate",
        "--config",
        cfg.to_str().unwrap(),
        "--t",
        "1",
        "--x",
        "-2:2:0.5",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let rows = data_rows(&String::from_utf8(a.stdout).unwrap());
    let at_one = rows.iter().find(|r| r[0] == 1.0).unwrap();
    assert!((at_one[1] - 0.467_160_024_646_448).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let semi = config("semistable.json");
    let semi = semi.to_str().unwrap();
    assert_eq!(
        run(&[
            "bounds",
            "off-diagonal",
            "--config",
            semi,
            "--t",
            "1",
            "--x",
            "0:6:0.5"
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        run(&["rate", "--config", semi, "--t", "-1", "--x", "1"])
            .status
            .code(),
        Some(2)
    );
    // A tail-only tempered measure is finite, so X_t has an atom at the origin.
    let tempered = config("tempered2.json");
    let o = run(&[
        "density",
        "--config",
        tempered.to_str().unwrap(),
        "--t",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no_density"));
    let cauchy = config("cauchy.json");
    let o = run(&[
        "rate",
        "--config",
        cauchy.to_str().unwrap(),
        "--t",
        "1",
        "--x",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("\"error\""));
    assert_eq!(
        run(&["validate", "--config", "/nonexistent/model.json"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn failing_verdict_exits_with_one() {
    // The ε = 0.2 exponent bound at x = 80 is not met for this tail.
    let cfg = config("tempered2.json");
    let o = run(&[
        "bounds",
        "asymptotics",
        "--config",
        cfg.to_str().unwrap(),
        "--t",
        "1",
        "--x",
        "20,40,80",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn simulate_writes_samples_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.bin");
    let cfg = config("cp1.json");
    let o = run(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--t",
        "1",
        "--n",
        "5000",
        "--seed",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(std::fs::read(&out).unwrap().len(), 5000 * 8);
    let side: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("s.bin.json")).unwrap()).unwrap();
    assert_eq!(side["N"], 5000);
    assert_eq!(side["seed"], 3);
}
