use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn write_config(dir: &TempDir, name: &str, json: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn noisenet(args: &[&str], config: &Path, out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_noisenet"));
    cmd.args(args).arg("--config").arg(config);
    if let Some(o) = out {
        cmd.arg("--out").arg(o);
    }
    cmd.output().unwrap()
}

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect()
}

const FNN_MIXED: &str = r#"{
  "network": {"type": "fnn", "layer_sizes": [1, 200, 200, 1]},
  "noise": {"du_a": 1e-4, "du_m": 1e-3},
  "run": {"repetitions": 100}
}"#;

#[test]
fn simulate_emits_one_row_per_step() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", FNN_MIXED);
    let out = dir.path().join("o.csv");
    let o = noisenet(&["simulate"], &cfg, Some(&out));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("t,mean_raw,mean_shifted,std,snr\n"));
    assert_eq!(text.lines().count(), 201);
    assert!(!text.contains('\r'));
    for r in rows(&text) {
        assert_eq!(r.len(), 5);
        assert!((r[4] - r[2] / r[3]).abs() <= 1e-12 * r[4].abs());
    }
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", FNN_MIXED);
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    assert!(noisenet(&["simulate"], &cfg, Some(&a)).status.success());
    assert!(noisenet(&["simulate", "--threads", "2"], &cfg, Some(&b)).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn noiseless_run_has_zero_std_and_infinite_snr() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"network": {"type": "fnn", "layer_sizes": [1, 20, 20, 1]}, "run": {"repetitions": 10}}"#,
    );
    let o = noisenet(&["simulate"], &cfg, None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    for line in text.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[3].parse::<f64>().unwrap(), 0.0);
        assert_eq!(f[4], "inf");
    }

    let report = noisenet(&["compare"], &cfg, None);
    assert_eq!(report.status.code(), Some(0));
    assert!(String::from_utf8(report.stdout).unwrap().contains("exact match"));
}

#[test]
fn analytic_snr_matches_its_columns() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", FNN_MIXED);
    let o = noisenet(&["analytic"], &cfg, None);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("t,mean,variance,snr\n"));
    // offset of the 4-layer chain with alpha = 1, b = 0.02
    let c_n = 0.08;
    for r in rows(&text) {
        let expected = (r[1] - c_n) / r[2].sqrt();
        assert!((r[3] - expected).abs() <= 1e-12 * expected.abs().max(1.0), "{r:?}");
    }
}

#[test]
fn divergent_recurrence_exits_with_code_2() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"network": {"type": "rnn", "hidden_size": 20, "beta": 1.0}, "noise": {"du_a": 1e-4}}"#,
    );
    let o = noisenet(&["analytic"], &cfg, None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("divergent"));
}

#[test]
fn feed_forward_limit_of_recurrent_analytic() {
    let dir = TempDir::new().unwrap();
    let noise = r#""noise": {"du_a": 1e-4, "dc_a": 1e-4, "du_m": 1e-3, "dc_m": 1e-3}, "input": {"length": 50}"#;
    let rnn = write_config(
        &dir,
        "r.json",
        &format!(r#"{{"network": {{"type": "rnn", "hidden_size": 200, "beta": 0.0, "gamma": 1.0, "transient": 0}}, {noise}}}"#),
    );
    let fnn = write_config(
        &dir,
        "f.json",
        &format!(r#"{{"network": {{"type": "fnn", "layer_sizes": [1, 200, 1]}}, {noise}}}"#),
    );
    let a = noisenet(&["analytic", "--raw-snr"], &rnn, None);
    let b = noisenet(&["analytic", "--raw-snr"], &fnn, None);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn schema_errors_name_the_field() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"network": {"type": "fnn", "layer_sizes": [1, 2, 1]}, "run": {"repetitions": 10, "seeds": 3}}"#,
    );
    let o = noisenet(&["simulate"], &cfg, None);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("run") && err.contains("seeds"), "{err}");

    let missing = dir.path().join("absent.json");
    assert_eq!(noisenet(&["simulate"], &missing, None).status.code(), Some(1));

    let bad_type = write_config(&dir, "t.json", r#"{"network": {"type": "fnn", "layer_sizes": "x"}}"#);
    let o = noisenet(&["simulate"], &bad_type, None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("network.layer_sizes"));
}

#[test]
fn compare_reports_tolerance_breach() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", FNN_MIXED);
    let o = noisenet(&["compare", "--tolerance", "1e-6"], &cfg, None);
    assert_eq!(o.status.code(), Some(3));
    let report = String::from_utf8(o.stdout).unwrap();
    assert!(report.contains("std relative deviation"));
    assert!(report.contains("FAIL"));
}

#[test]
fn multiplex_sweep_is_normalized_to_single_input() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"network": {"type": "fnn", "layer_sizes": [1, 50, 50, 1]},
            "noise": {"du_a": 1e-4, "dc_m": 1e-4, "du_m": 1e-3},
            "run": {"repetitions": 100},
            "sweep": {"i1_values": [1, 2, 5, 10, 50]}}"#,
    );
    let o = noisenet(&["sweep", "multiplex"], &cfg, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "series,input_neurons,summary,ratio");
    assert_eq!(lines.len(), 6);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[1], "1");
    assert_eq!(first[3].parse::<f64>().unwrap(), 1.0);
}

#[test]
fn depth_sweep_ratio_decreases_for_uncorrelated_noise() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"network": {"type": "fnn", "layer_sizes": [1, 200, 200, 1]},
            "noise": {"du_a": 1e-4, "du_m": 1e-3},
            "run": {"repetitions": 200},
            "sweep": {"layers": [3, 6, 10, 20, 30]}}"#,
    );
    let o = noisenet(&["sweep", "depth"], &cfg, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let ratios: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios[0], 1.0);
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
}

#[test]
fn beta_sweep_with_correlated_additive_noise_peaks_inside() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.json",
        r#"{"network": {"type": "rnn", "hidden_size": 200},
            "noise": {"du_a": 1e-4, "du_m": 1e-3},
            "run": {"repetitions": 100},
            "sweep": {"betas": [0.0, 0.4, 0.8, 0.9],
                      "variants": [{"name": "dca", "du_a": 1e-4, "dc_a": 1e-3, "du_m": 1e-3}]}}"#,
    );
    let o = noisenet(&["sweep", "beta"], &cfg, None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let r: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    let inner = r[1].max(r[2]);
    assert!(inner > r[0] && inner > r[3], "{r:?}");
}

#[test]
fn sweep_kind_must_match_network() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.json", FNN_MIXED);
    assert_eq!(noisenet(&["sweep", "beta"], &cfg, None).status.code(), Some(1));
}
