use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn augspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_augspec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = augspec(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn column(csv: &str, col: usize) -> Vec<f64> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with('t'))
        .map(|l| l.split(',').nth(col).unwrap().parse().unwrap())
        .collect()
}

fn json(path: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn synth_harmonic_is_a_cosine() {
    let csv = ok(&[
        "synth", "--class", "harmonic", "--bin", "1", "--amp", "1", "--phase", "0", "--frames",
        "100", "--seed", "7",
    ]);
    assert!(csv.starts_with("# augspec-signal v1\n"));
    let x = column(&csv, 1);
    assert_eq!(x.len(), 100 * 3);
    for (t, v) in x.iter().enumerate() {
        let expected = (2.0 * PI * t as f64 / 3.0).cos();
        assert!((v - expected).abs() < 1e-10, "t = {t}: {v} vs {expected}");
    }
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (path(&dir, "a.csv"), path(&dir, "b.csv"));
    for out in [&a, &b] {
        ok(&[
            "synth",
            "--class",
            "wss",
            "--bins",
            "2",
            "--channels",
            "2",
            "--frames",
            "50",
            "--seed",
            "3",
            "--out",
            out,
        ]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn missing_model_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    let out_path = path(&dir, "out.csv");
    let missing = path(&dir, "missing.json");
    let out = augspec(&["synth", "--model", &missing, "--out", &out_path]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert!(!Path::new(&out_path).exists());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn model_document_round_trips_through_synth() {
    let dir = TempDir::new().unwrap();
    let signal = path(&dir, "s.csv");
    let model = path(&dir, "m.json");
    let again = path(&dir, "again.json");
    ok(&[
        "synth",
        "--class",
        "general-cyclo",
        "--bins",
        "2",
        "--frames",
        "200",
        "--out",
        &signal,
    ]);
    ok(&["estimate", "--input", &signal, "--out", &model]);
    ok(&[
        "synth", "--model", &model, "--frames", "10", "--out", &signal,
    ]);
    ok(&["estimate", "--input", &signal, "--out", &again]);
    let doc = json(&model);
    assert_eq!(doc["format"], "augspec-model");
    assert_eq!(doc["version"], 1);
    assert_eq!(doc["bins"], 2);
    let mut bumped = doc.clone();
    bumped["version"] = 2.into();
    fs::write(&model, bumped.to_string()).unwrap();
    let out = augspec(&["sut", "--model", &model]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn misaligned_signal_exits_2() {
    let dir = TempDir::new().unwrap();
    let signal = path(&dir, "s.csv");
    fs::write(&signal, "t,x1\n0,1\n1,2\n2,3\n3,4\n").unwrap();
    let out = augspec(&["estimate", "--input", &signal, "--bins", "1"]);
    assert_eq!(out.status.code(), Some(2));
    fs::write(&signal, "# augspec-signal v9\nt,x1\n0,1\n1,2\n2,3\n").unwrap();
    let out = augspec(&["estimate", "--input", &signal, "--bins", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_signal_gives_zero_model() {
    let dir = TempDir::new().unwrap();
    let signal = path(&dir, "zero.csv");
    let model = path(&dir, "zero.json");
    let mut text = String::from("t,x1,x2\n");
    for t in 0..50 {
        text.push_str(&format!("{t},0,0\n"));
    }
    fs::write(&signal, text).unwrap();
    ok(&[
        "estimate", "--input", &signal, "--bins", "2", "--out", &model,
    ]);
    let doc = json(&model);
    for key in ["mean", "r", "p"] {
        let flat = doc[key].to_string();
        assert!(
            flat.chars()
                .filter(|c| c.is_ascii_digit())
                .all(|c| c == '0'),
            "{key}: {flat}"
        );
    }
}

#[test]
fn ml_refine_keeps_wss_mean() {
    let dir = TempDir::new().unwrap();
    let signal = path(&dir, "wss.csv");
    let (plain, refined) = (path(&dir, "plain.json"), path(&dir, "refined.json"));
    ok(&[
        "synth", "--class", "wss", "--frames", "400", "--seed", "5", "--out", &signal,
    ]);
    ok(&["estimate", "--input", &signal, "--out", &plain]);
    let summary = ok(&[
        "estimate",
        "--input",
        &signal,
        "--ml-refine",
        "--out",
        &refined,
    ]);
    assert!(summary.contains("log_likelihood"));
    let (a, b) = (json(&plain), json(&refined));
    for k in 0..2 {
        let x = a["mean"][0][k].as_f64().unwrap();
        let y = b["mean"][0][k].as_f64().unwrap();
        assert!((x - y).abs() < 1e-6, "{x} vs {y}");
    }
}

fn outcomes(report: &str) -> Vec<Value> {
    let doc: Value = serde_json::from_str(report).unwrap();
    assert_eq!(doc["format"], "augspec-detect");
    doc["outcomes"].as_array().unwrap().clone()
}

#[test]
fn strong_harmonic_is_detected() {
    let dir = TempDir::new().unwrap();
    let signal = path(&dir, "h.csv");
    // Amplitude √2 over unit noise is an SNR of 0 dB.
    ok(&[
        "synth",
        "--class",
        "harmonic",
        "--amp",
        "1.4142135623730951",
        "--noise",
        "1",
        "--frames",
        "500",
        "--seed",
        "11",
        "--out",
        &signal,
    ]);
    let report = ok(&[
        "detect", "--input", &signal, "--test", "harmonic", "--alpha", "0.1",
    ]);
    let out = outcomes(&report);
    assert_eq!(out.len(), 1);
    assert_eq!(out[0]["reject"], true);
    assert!(out[0]["p_value"].as_f64().unwrap() < 1e-6, "{report}");
}

#[test]
fn nonstat_statistic_dominates_cyclo_on_wss_data() {
    let dir = TempDir::new().unwrap();
    let signal = path(&dir, "w.csv");
    ok(&[
        "synth",
        "--class",
        "wss",
        "--bins",
        "2",
        "--channels",
        "2",
        "--frames",
        "300",
        "--seed",
        "4",
        "--out",
        &signal,
    ]);
    let out = outcomes(&ok(&["detect", "--input", &signal, "--test", "all"]));
    assert_eq!(out.len(), 3);
    let stat = |i: usize| out[i]["statistic"].as_f64().unwrap();
    assert!(stat(2) >= stat(1));
}

#[test]
fn invalid_alpha_exits_2() {
    let dir = TempDir::new().unwrap();
    let signal = path(&dir, "w.csv");
    ok(&[
        "synth", "--class", "wss", "--frames", "20", "--out", &signal,
    ]);
    for alpha in ["0", "1", "-0.5", "nan"] {
        let out = augspec(&["detect", "--input", &signal, "--alpha", alpha]);
        assert_eq!(out.status.code(), Some(2), "alpha = {alpha}");
    }
}

#[test]
fn zero_trials_and_bad_sweeps_exit_2() {
    assert_eq!(augspec(&["roc", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(
        augspec(&["consistency", "--trials", "0"]).status.code(),
        Some(2)
    );
    let bad = augspec(&["roc", "--test", "harmonic", "--sweep", "rho"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = augspec(&["roc", "--test", "cyclo", "--rho", "1.5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn roc_table_is_reproducible() {
    let args = [
        "roc",
        "--test",
        "cyclo",
        "--channels",
        "2",
        "--frames",
        "100",
        "--trials",
        "100",
        "--rho",
        "0,0.3",
        "--seed",
        "2",
    ];
    let a = ok(&args);
    assert_eq!(a, ok(&args));
    assert!(a.starts_with("# augspec-roc v1\n"));
    let rows: Vec<&str> = a.lines().filter(|l| l.starts_with("cyclo,")).collect();
    assert_eq!(rows.len(), 2 * 50);
}

#[test]
fn consistency_slope_is_minus_one() {
    let table = ok(&[
        "consistency",
        "--frames",
        "10,100,1000",
        "--trials",
        "300",
        "--seed",
        "1",
    ]);
    assert!(table.starts_with("# augspec-consistency v1\n"));
    let rows: Vec<Vec<&str>> = table
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("estimator"))
        .map(|l| l.split(',').collect())
        .collect();
    assert_eq!(rows.len(), 9);
    for row in rows {
        let slope: f64 = row[4].parse().unwrap();
        assert!((slope + 1.0).abs() <= 0.1, "{row:?}");
    }
}

#[test]
fn thread_cap_is_validated() {
    let out = Command::new(env!("CARGO_BIN_EXE_augspec"))
        .args(["consistency", "--frames", "10,20", "--trials", "100"])
        .env("AUGSPEC_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let capped = Command::new(env!("CARGO_BIN_EXE_augspec"))
        .args(["consistency", "--frames", "10,20", "--trials", "100"])
        .env("AUGSPEC_THREADS", "1")
        .output()
        .unwrap();
    assert!(capped.status.success());
    assert_eq!(
        capped.stdout,
        ok(&["consistency", "--frames", "10,20", "--trials", "100"]).into_bytes()
    );
}
