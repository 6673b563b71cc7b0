//! End-to-end tests of the command-line surface: exit codes, CSV shapes,
//! determinism, and the negative-control hook of `verify`.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qpd-sim"))
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

const FOCK_SQUEEZE: &str = r#"{
    "modes": 1,
    "inputs": [{"type": "fock", "n": 1}],
    "gates": [{"type": "squeeze", "modes": [0], "r": 0.3}],
    "detectors": [{"type": "heterodyne"}]
}"#;

const COHERENT_EMPTY: &str = r#"{
    "modes": 1,
    "inputs": [{"type": "coherent", "re": 0.5, "im": 0.0}],
    "gates": [],
    "detectors": [{"type": "heterodyne"}]
}"#;

const SQUEEZE_LOSS: &str = r#"{
    "modes": 1,
    "inputs": [{"type": "squeezed_vacuum", "r": 0.2}],
    "gates": [{"type": "loss", "modes": [0], "eta": 0.8}],
    "detectors": [{"type": "heterodyne"}]
}"#;

#[test]
fn analyze_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();

    let failing = write(dir.path(), "failing.json", FOCK_SQUEEZE);
    let report = dir.path().join("report.json");
    let out = run(&[
        "analyze",
        failing.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(doc["outcome"], "failed");
    assert_eq!(doc["failure"]["layer_index"], 0);
    assert_eq!(doc["tau_trace"][0][0], -1.0);
    assert_eq!(doc["input_hash"].as_str().unwrap().len(), 64);

    let fine = write(dir.path(), "fine.json", COHERENT_EMPTY);
    let out = run(&["analyze", fine.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));

    let malformed = write(dir.path(), "malformed.json", "{\"modes\": ");
    let out = run(&["analyze", malformed.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let unknown_key = write(
        dir.path(),
        "unknown.json",
        &COHERENT_EMPTY.replace("\"modes\": 1", "\"modes\": 1, \"oops\": true"),
    );
    let out = run(&["analyze", unknown_key.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn sample_csv_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(dir.path(), "c.json", SQUEEZE_LOSS);

    let a = run(&["sample", circuit.to_str().unwrap(), "-n", "200", "--seed", "7"]);
    assert_eq!(a.status.code(), Some(0));
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "record,mode,outcome_q,outcome_p");
    assert_eq!(text.lines().count(), 201);
    let first = lines.next().unwrap();
    assert!(first.starts_with("0,0,"));

    let b = run(&["sample", circuit.to_str().unwrap(), "-n", "200", "--seed", "7"]);
    assert_eq!(text, String::from_utf8(b.stdout).unwrap());

    let c = run(&["sample", circuit.to_str().unwrap(), "-n", "200", "--seed", "8"]);
    assert_ne!(text, String::from_utf8(c.stdout).unwrap());

    // click-detector circuits use the click header
    let clicks = write(
        dir.path(),
        "clicks.json",
        &SQUEEZE_LOSS
            .replace("{\"type\": \"heterodyne\"}", "{\"type\": \"ideal_on_off\"}")
            .replace("\"r\": 0.2", "\"r\": 0.0")
            .replace("\"eta\": 0.8", "\"eta\": 0.0"),
    );
    let out = run(&["sample", clicks.to_str().unwrap(), "-n", "10"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "record,mode,click");

    // analyzable but not samplable: Fock input with a heterodyne detector
    let fock = write(
        dir.path(),
        "fock.json",
        &FOCK_SQUEEZE.replace(
            "[{\"type\": \"squeeze\", \"modes\": [0], \"r\": 0.3}]",
            "[]",
        ),
    );
    let out = run(&["sample", fock.to_str().unwrap(), "-n", "5"]);
    assert_eq!(out.status.code(), Some(3));

    // analysis failure propagates as exit 2
    let failing = write(dir.path(), "failing.json", FOCK_SQUEEZE);
    let out = run(&["sample", failing.to_str().unwrap(), "-n", "5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_pass_negative_control_and_mode_limit() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(dir.path(), "c.json", SQUEEZE_LOSS);

    let out = run(&[
        "verify",
        circuit.to_str().unwrap(),
        "--samples",
        "100000",
        "--seed",
        "3",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("PASS"), "{stdout}");

    let out = bin()
        .args(["verify", circuit.to_str().unwrap(), "--samples", "100000"])
        .env("QPD_SIM_CORRUPT_KERNEL", "1")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));

    let three_modes = write(
        dir.path(),
        "three.json",
        r#"{
            "modes": 3,
            "inputs": [{"type": "vacuum"}, {"type": "vacuum"}, {"type": "vacuum"}],
            "gates": [],
            "detectors": [{"type": "heterodyne"}, {"type": "heterodyne"}, {"type": "heterodyne"}]
        }"#,
    );
    let out = run(&["verify", three_modes.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2 modes"));
}

#[test]
fn verify_discrete_detectors() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(
        dir.path(),
        "onoff.json",
        r#"{
            "modes": 1,
            "inputs": [{"type": "coherent", "re": 1.0, "im": 0.0}],
            "gates": [],
            "detectors": [{"type": "ideal_on_off"}]
        }"#,
    );
    let out = run(&[
        "verify",
        circuit.to_str().unwrap(),
        "--samples",
        "200000",
        "--threshold",
        "0.01",
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("total variation"));
}

#[test]
fn cubic_rstar_anchors() {
    let out = run(&["cubic-rstar", "--eps", "1e-2,1e-3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "epsilon,r_star,bracket_lo,bracket_hi,min_value,status"
    );
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    let r2: f64 = rows[0][1].parse().unwrap();
    let r3: f64 = rows[1][1].parse().unwrap();
    assert!((5.3..=5.7).contains(&r2), "r*(1e-2) = {r2}");
    assert!((7.18..=7.58).contains(&r3), "r*(1e-3) = {r3}");
    assert!(rows.iter().all(|r| r[5] == "ok"));
}

#[test]
fn curves_commands() {
    let out = run(&["curves", "--gate", "squeeze", "--r", "0.3", "--points", "21"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "s_in,s_out_max,feasible");
    // slope on the classical side is e^{-0.6}
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let s_in: f64 = cols[0].parse().unwrap();
        let bound: f64 = cols[1].parse().unwrap();
        if s_in > 0.0 {
            assert!((bound / s_in - (-0.6f64).exp()).abs() < 1e-12);
        }
    }

    let out = run(&["curves", "--gate", "subtraction", "--kappa", "0.0,0.5", "--points", "11"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "kappa,s_in,s_out_max,feasible");
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let kappa: f64 = cols[0].parse().unwrap();
        let s_in: f64 = cols[1].parse().unwrap();
        let bound: f64 = cols[2].parse().unwrap();
        if kappa == 0.0 {
            assert_eq!(s_in, bound); // the diagonal
        }
    }

    let out = run(&["curves", "--gate", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn loss_tolerance_reports_deficit() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = write(dir.path(), "c.json", FOCK_SQUEEZE);
    let out = run(&["loss-tolerance", circuit.to_str().unwrap(), "--layer", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    // closed form: 1 - (1 + e^{-0.6})/2 ≈ 0.2256
    let deficit: f64 = text
        .split(':')
        .next_back()
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!((deficit - 0.2256).abs() < 2e-3, "{text}");
}
