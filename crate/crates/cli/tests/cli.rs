use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hhgq(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hhgq"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn ok(o: Output) -> Output {
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(p: impl AsRef<Path>) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn simulate(dir: &Path, config: &str, out: &str) {
    write(dir, "sim.json", config);
    ok(hhgq(dir, &["simulate", "--config", "sim.json", "--out", out]));
}

const THERMAL: &str = r#"{"source": {"kind": "modes", "modes": [{"r": 0.0, "n_th": 0.6}]},
    "optics": {"eta": 0.1, "splitter": [0.34, 0.33, 0.33], "n_pulses": 20000000}, "seed": 5}"#;

#[test]
fn vacuum_gives_empty_file() {
    let t = TempDir::new().unwrap();
    simulate(
        t.path(),
        r#"{"source": {"kind": "modes", "modes": [{"r": 0.0}]}, "optics": {"eta": 0.5, "n_pulses": 100000}}"#,
        "v",
    );
    assert_eq!(fs::metadata(t.path().join("v/tags.hhgt")).unwrap().len(), 16);
    let s = json(t.path().join("v/simulate.json"));
    assert!(s["truth"]["expected"].is_null());
    assert_eq!(s["provenance"]["seed"], 0);
}

#[test]
fn simulation_is_bit_reproducible() {
    let t = TempDir::new().unwrap();
    let cfg = r#"{"source": {"kind": "hyperparams", "B": 0.471, "mu": 0.4226, "alpha": 0.127, "n_th": 0.001, "d": 50},
        "optics": {"eta": 0.05, "splitter": [0.34, 0.33, 0.33], "n_pulses": 300000}, "seed": 11}"#;
    write(t.path(), "sim.json", cfg);
    ok(hhgq(t.path(), &["simulate", "--config", "sim.json", "--out", "a"]));
    ok(hhgq(t.path(), &["simulate", "--config", "sim.json", "--out", "b", "--threads", "2"]));
    ok(hhgq(t.path(), &["simulate", "--config", "sim.json", "--out", "c", "--seed", "12"]));
    let read = |d: &str| fs::read(t.path().join(d).join("tags.hhgt")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    let pa = json(t.path().join("a/simulate.json"));
    let pc = json(t.path().join("c/simulate.json"));
    assert_eq!(pa["provenance"]["config"]["optics"]["jitter_sigma_ps"], 100.0);
    assert_ne!(pa["provenance"]["config_sha256"], pc["provenance"]["config_sha256"]);
    assert_eq!(pc["provenance"]["seed"], 12);
}

#[test]
fn configuration_errors_exit_2() {
    let t = TempDir::new().unwrap();
    write(
        t.path(),
        "typo.json",
        r#"{"source": {"kind": "pair", "n_bar": 1.0}, "optics": {"eta": 0.5, "n_pulses": 10, "etaa": 1}}"#,
    );
    write(
        t.path(),
        "bad.json",
        r#"{"source": {"kind": "pair", "n_bar": 1.0}, "optics": {"eta": 1.5, "n_pulses": 10}}"#,
    );
    write(t.path(), "g2.json", r#"{"channels": [0, 1], "analysis": {"min_r2": 2.0}}"#);
    assert_eq!(code(&hhgq(t.path(), &["simulate"])), 2);
    assert_eq!(code(&hhgq(t.path(), &["simulate", "--config", "missing.json"])), 2);
    assert_eq!(code(&hhgq(t.path(), &["simulate", "--config", "typo.json"])), 2);
    assert_eq!(code(&hhgq(t.path(), &["simulate", "--config", "bad.json"])), 2);
    assert_eq!(code(&hhgq(t.path(), &["analyze-g2", "x.hhgt", "--config", "g2.json"])), 2);
    assert_eq!(code(&hhgq(t.path(), &["no-such-command"])), 2);
    assert_eq!(code(&hhgq(t.path(), &["simulate", "--threads", "0", "--config", "bad.json"])), 2);
}

#[test]
fn data_errors_exit_3() {
    let t = TempDir::new().unwrap();
    assert_eq!(code(&hhgq(t.path(), &["analyze-g2", "missing.hhgt"])), 3);
    write(t.path(), "junk.hhgt", "not a tag file at all");
    assert_eq!(code(&hhgq(t.path(), &["analyze-g2", "junk.hhgt"])), 3);
    // Far too few coincidences to find satellites.
    simulate(
        t.path(),
        r#"{"source": {"kind": "modes", "modes": [{"r": 0.0, "n_th": 0.6}]},
            "optics": {"eta": 0.1, "n_pulses": 20000}, "seed": 1}"#,
        "few",
    );
    assert_eq!(code(&hhgq(t.path(), &["analyze-g2", "few/tags.hhgt"])), 3);
    write(t.path(), "data.csv", "mean_n,g2,g2_err,g3,g3_err\n0.1,1.5,0.1,2.0,0.2\n");
    assert_eq!(code(&hhgq(t.path(), &["fit", "data.csv"])), 3);
}

#[test]
fn thermal_and_coherent_files() {
    let t = TempDir::new().unwrap();
    simulate(t.path(), THERMAL, "th");
    ok(hhgq(t.path(), &["analyze-g2", "th/tags.hhgt", "--out", "a"]));
    let g2 = json(t.path().join("a/g2.json"));
    let e = &g2["results"][0]["estimate"];
    let (v, s) = (e["value"].as_f64().unwrap(), e["std_error"].as_f64().unwrap());
    assert!((v - 2.0).abs() < 3.0 * s, "{v} ± {s}");
    assert!(t.path().join("a/g2_histogram.csv").exists());

    // Analysis is a pure function of file and config.
    ok(hhgq(t.path(), &["analyze-g2", "th/tags.hhgt", "--out", "b"]));
    assert_eq!(
        fs::read(t.path().join("a/g2.json")).unwrap(),
        fs::read(t.path().join("b/g2.json")).unwrap()
    );

    simulate(
        t.path(),
        r#"{"source": {"kind": "modes", "modes": [{"r": 0.0, "alpha": 0.7}]},
            "optics": {"eta": 0.1, "n_pulses": 20000000}, "seed": 2}"#,
        "coh",
    );
    write(
        t.path(),
        "g2.json",
        r#"{"channels": [0, 1], "mean_photon": {"channels": [0, 1], "eta": 0.1}}"#,
    );
    ok(hhgq(t.path(), &["analyze-g2", "coh/tags.hhgt", "--config", "g2.json", "--out", "c"]));
    let g2 = json(t.path().join("c/g2.json"));
    let r = &g2["results"][0];
    let (v, s) = (r["estimate"]["value"].as_f64().unwrap(), r["estimate"]["std_error"].as_f64().unwrap());
    assert!((v - 1.0).abs() < 3.0 * s, "{v} ± {s}");
    let n = r["mean_photon"]["value"].as_f64().unwrap();
    // Binary detectors undercount slightly at this rate.
    assert!((n - 0.49).abs() < 0.02, "{n}");
    assert_eq!(g2["provenance"]["config"]["mean_photon"]["n_pulses"], 20000000);
}

#[test]
fn repetitions_and_three_fold() {
    let t = TempDir::new().unwrap();
    let cfg = THERMAL.replace("20000000", "40000000");
    simulate(t.path(), &cfg, "r1");
    write(t.path(), "s2.json", &cfg.replace("\"seed\": 5", "\"seed\": 6"));
    ok(hhgq(t.path(), &["simulate", "--config", "s2.json", "--out", "r2"]));
    ok(hhgq(t.path(), &["analyze-g3", "r1/tags.hhgt", "r2/tags.hhgt", "--out", "g3"]));
    let g3 = json(t.path().join("g3/g3.json"));
    assert_eq!(g3["results"].as_array().unwrap().len(), 2);
    let a = &g3["aggregate"];
    assert_eq!(a["n_satellites_used"], 56);
    let (v, s) = (a["value"].as_f64().unwrap(), a["std_error"].as_f64().unwrap());
    assert!(v > 4.0 && v < 8.0 && s > 0.0, "{v} ± {s}");
    assert!(t.path().join("g3/g3_histogram_0.csv").exists());
    assert!(t.path().join("g3/g3_histogram_1.csv").exists());
}

#[test]
fn pair_source_csi() {
    let t = TempDir::new().unwrap();
    simulate(
        t.path(),
        r#"{"source": {"kind": "pair", "n_bar": 1.0}, "optics": {"eta": 0.02, "n_pulses": 20000000}, "seed": 9}"#,
        "p",
    );
    ok(hhgq(t.path(), &["csi", "p/tags.hhgt", "--out", "c"]));
    let c = json(t.path().join("c/csi.json"));
    let (r, s) = (c["csi"]["R"].as_f64().unwrap(), c["csi"]["std_error"].as_f64().unwrap());
    assert!((r - 2.25).abs() < 3.0 * s, "{r} ± {s}");
    assert!(r - 1.0 > 5.0 * s);
    for h in ["ii", "jj", "ij"] {
        assert!(t.path().join(format!("c/csi_{h}_histogram.csv")).exists());
    }
}

const H4_CURVE_FIT: &str = r#"{"bounds": {"B": [0.3, 0.7], "mu": [0.25, 0.6], "alpha": [0.05, 0.25], "n_th": [0.0, 0.01]},
    "n_starts": 2, "d": 12, "seed": 4}"#;

fn h4_dataset(dir: &Path) {
    use hhgq_core::estimate::model_curve;
    use hhgq_core::state::{HyperParams, OracleConfig};
    let curve = model_curve(&HyperParams::h4_optimum().with_modes(12), &OracleConfig::default()).unwrap();
    let mut s = String::from("mean_n,g2,g2_err,g3,g3_err\n");
    for p in curve {
        s.push_str(&format!("{},{},0.01,{},0.05\n", p.mean_n, p.g2, p.g3));
    }
    write(dir, "data.csv", &s);
}

#[test]
fn fit_and_report() {
    let t = TempDir::new().unwrap();
    h4_dataset(t.path());
    write(t.path(), "fit.json", H4_CURVE_FIT);
    ok(hhgq(t.path(), &["fit", "data.csv", "--config", "fit.json", "--out", "f"]));
    ok(hhgq(t.path(), &["fit", "data.csv", "--config", "fit.json", "--out", "g"]));
    let read = |p: &str| fs::read(t.path().join(p)).unwrap();
    assert_eq!(read("f/fit.json"), read("g/fit.json"));
    assert_eq!(read("f/model_curve.csv"), read("g/model_curve.csv"));
    let f = json(t.path().join("f/fit.json"));
    let mu = f["result"]["hyperparams"]["mu"].as_f64().unwrap();
    assert!((mu - 0.4226).abs() < 0.05 * 0.4226, "{mu}");
    assert!((f["schmidt_number"].as_f64().unwrap() - 1.43).abs() < 0.02);
    assert_eq!(f["provenance"]["inputs"][0]["path"], "data.csv");

    write(
        t.path(),
        "report.json",
        r#"{"harmonics": [
              {"name": "H4", "hyperparams": {"B": 0.471, "mu": 0.4226, "alpha": 0.127, "n_th": 0.001, "d": 50}},
              {"name": "fitted", "fit": "f/fit.json", "data": "data.csv"},
              {"name": "single", "hyperparams": {"B": 0.5, "mu": 0.0, "alpha": 0.0, "n_th": 0.0, "d": 5}}],
            "csi": [{"intensity": 2.0, "path": "csi.json"}]}"#,
    );
    write(
        t.path(),
        "csi.json",
        &serde_json::json!({
            "provenance": f["provenance"],
            "repetitions": [],
            "combined": {"g2_ii": est(2.0), "g2_jj": est(2.0), "g2_ij": est(3.0)},
            "csi": {"R": 2.25, "std_error": 0.1, "g2_ii": 2.0, "g2_jj": 2.0, "g2_ij": 3.0}
        })
        .to_string(),
    );
    ok(hhgq(t.path(), &["report", "--config", "report.json", "--out", "rep"]));
    let rep = json(t.path().join("rep/report.json"));
    let k = rep["harmonics"][0]["schmidt_number"].as_f64().unwrap();
    assert!((k - 1.43).abs() < 0.01, "{k}");
    assert_eq!(rep["csi"][0]["R"], 2.25);

    let mut rd = csv::Reader::from_path(t.path().join("rep/squeezer_distribution.csv")).unwrap();
    let rows: Vec<(String, usize, f64, f64, f64)> = rd.deserialize().map(|r| r.unwrap()).collect();
    let single: Vec<_> = rows.iter().filter(|r| r.0 == "single" && r.3 > 0.0).collect();
    assert_eq!(single.len(), 1);
    for (_, _, _, r, db) in &rows {
        assert!((db - 8.685889638 * r).abs() < 1e-9);
    }
    assert_eq!(rows.iter().filter(|r| r.0 == "H4").count(), 50);
    for name in ["model_curves.csv", "transition_curves.csv", "data_points.csv", "csi_vs_intensity.csv"] {
        assert!(t.path().join("rep").join(name).exists(), "{name}");
    }
}

fn est(v: f64) -> Value {
    serde_json::json!({"value": v, "std_error": 0.01, "n_satellites_used": 48, "satellite_cv": 0.01,
        "fit_r2": 0.99, "method": "gaussian-fit", "central_height": 100.0, "satellite_mean": 50.0})
}

#[test]
fn fit_budget_exhaustion_exits_4() {
    let t = TempDir::new().unwrap();
    h4_dataset(t.path());
    write(t.path(), "fit.json", r#"{"n_starts": 2, "d": 12, "max_evals": 10}"#);
    assert_eq!(code(&hhgq(t.path(), &["fit", "data.csv", "--config", "fit.json"])), 4);
}

#[test]
fn crossover_table() {
    let t = TempDir::new().unwrap();
    let mut s = String::from("intensity,yield\n");
    for i in 0..30 {
        let x = 0.2 * 1.15f64.powi(i);
        let y = if x < 1.0 { 2.0 * x.powf(4.0) } else { 2.0 * x.powf(1.5) };
        s.push_str(&format!("{x},{y}\n"));
    }
    write(t.path(), "y.csv", &s);
    ok(hhgq(t.path(), &["crossover", "y.csv", "--out", "c"]));
    let c = json(t.path().join("c/crossover.json"));
    assert!((c["fit"]["p_low"].as_f64().unwrap() - 4.0).abs() < 0.2);
    assert!((c["fit"]["p_high"].as_f64().unwrap() - 1.5).abs() < 0.075);
    assert!(t.path().join("c/crossover_curve.csv").exists());
}
