//! Black-box tests of the `regionbeam` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use regionbeam::metrics::si_sdr;
use regionbeam::scene::SceneManifest;
use regionbeam::wavio::read_wav;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_regionbeam"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("spawn");
    assert!(
        out.status.success(),
        "command {:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn simulate(out_dir: &Path, preset: &str, seed: u64) -> PathBuf {
    run_ok(&[
        "simulate",
        "--out",
        out_dir.to_str().unwrap(),
        "--preset",
        preset,
        "--num-scenes",
        "1",
        "--seed",
        &seed.to_string(),
    ]);
    out_dir.join("scene_0000")
}

#[test]
fn simulate_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let a = simulate(&tmp.path().join("a"), "s1+3", 7);
    let b = simulate(&tmp.path().join("b"), "s1+3", 7);
    for name in ["mixture.wav", "scene.json"] {
        let x = std::fs::read(a.join(name)).unwrap();
        let y = std::fs::read(b.join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
}

#[test]
fn s1_s3_manifest_azimuth_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = simulate(tmp.path(), "s1+3", 3);
    let manifest = SceneManifest::read_from(&dir.join("scene.json")).unwrap();
    let az = |id: &str| {
        manifest
            .regions
            .iter()
            .find(|r| r.region_id == id)
            .unwrap()
            .region
            .center
            .azimuth
    };
    let gap = (az("S1") - az("S3")).abs().to_degrees();
    assert!((gap - 16.0).abs() <= 0.5, "center azimuth gap {gap}°");
}

#[test]
fn three_speaker_preset_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = simulate(tmp.path(), "s1+2+3", 5);
    let manifest = SceneManifest::read_from(&dir.join("scene.json")).unwrap();
    let count = |role: &str| {
        manifest
            .files
            .stems
            .iter()
            .filter(|s| s.contains(&format!("_{role}_")))
            .count()
    };
    assert_eq!(count("target"), 1);
    assert_eq!(count("interferer"), 2);
    assert!(count("noise") >= 3);
}

#[test]
fn mask_only_single_source_near_identity() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("sim.json");
    std::fs::write(
        &cfg,
        r#"{"preset": "s1", "num_scenes": 1, "duration_s": 2.0,
            "t60_range": [0.0, 0.0], "noise_enabled": false}"#,
    )
    .unwrap();
    run_ok(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    let dir = tmp.path().join("scene_0000");
    run_ok(&[
        "separate",
        "--scene-dir",
        dir.to_str().unwrap(),
        "--mode",
        "sf-center",
        "--mask",
        "oracle-irm",
        "--beamformer",
        "mask-only",
    ]);
    let enh = read_wav(&dir.join("enhanced-sf-center_oracle-irm_mask-only.wav"))
        .unwrap()
        .remove(0);
    let stem = read_wav(&dir.join("stems/00_target_S1.wav")).unwrap().remove(0);
    let n = enh.len().min(stem.len());
    let si = si_sdr(&stem[..n], &enh[..n]).unwrap();
    assert!(si >= 20.0, "single-source mask-only SI-SDR {si:.1} dB");
}

#[test]
fn region_mode_never_reads_true_location() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = simulate(tmp.path(), "s1+3", 11);
    let args = [
        "separate",
        "--scene-dir",
        dir.to_str().unwrap(),
        "--mode",
        "rf-region",
        "--posterior",
        "heuristic",
        "--mask",
        "feature",
        "--beamformer",
        "mvdr",
    ];
    run_ok(&args);
    let first = std::fs::read(dir.join("enhanced-rf-region_feature_mvdr.wav")).unwrap();

    // move the manifest's true target location inside the box; audio and
    // region geometry stay fixed, so region mode must not notice
    let text = std::fs::read_to_string(dir.join("scene.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let loc = &mut v["spec"]["sources"][0]["location"];
    loc["distance"] = (loc["distance"].as_f64().unwrap() + 0.03).into();
    loc["elevation"] = (loc["elevation"].as_f64().unwrap() + 0.01).into();
    std::fs::write(dir.join("scene.json"), serde_json::to_string_pretty(&v).unwrap()).unwrap();

    run_ok(&args);
    let second = std::fs::read(dir.join("enhanced-rf-region_feature_mvdr.wav")).unwrap();
    assert_eq!(first, second, "region mode output depends on the true location");
}

#[test]
fn evaluate_conditions_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = simulate(tmp.path(), "s1+3", 13);
    run_ok(&[
        "separate",
        "--scene-dir",
        dir.to_str().unwrap(),
        "--mode",
        "sf-center",
        "--mask",
        "oracle-irm",
        "--beamformer",
        "mvdr",
    ]);
    let csv = tmp.path().join("report.csv");
    run_ok(&[
        "evaluate",
        "--root",
        tmp.path().to_str().unwrap(),
        "--conditions",
        "sf-center_oracle-irm_mvdr",
        "--out",
        csv.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scene_id,condition,si_sdr_mix,si_sdr_enh,delta"
    );
    // one row for the scene plus one mean row for the condition
    let rest: Vec<&str> = lines.collect();
    assert_eq!(rest.len(), 2);
    assert!(rest[1].starts_with("mean,sf-center_oracle-irm_mvdr,"));

    // no scene directories under the root → usage error
    let empty = tmp.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    let out = bin()
        .args([
            "evaluate",
            "--root",
            empty.to_str().unwrap(),
            "--conditions",
            "sf-center_oracle-irm_mvdr",
            "--out",
            csv.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_scene_dir_is_io_error() {
    let out = bin()
        .args(["separate", "--scene-dir", "/nonexistent/scene"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scene"), "error message should name the path: {err}");
}

#[test]
fn bad_flag_combination_is_usage_error() {
    let out = bin()
        .args([
            "separate",
            "--scene-dir",
            "/tmp",
            "--mask",
            "feature",
            "--beamformer",
            "mcwf",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn beampattern_csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = simulate(tmp.path(), "s1+3", 17);
    let out_csv = tmp.path().join("pattern.csv");
    run_ok(&[
        "beampattern",
        "--scene-dir",
        dir.to_str().unwrap(),
        "--az",
        "0:360:30",
        "--el",
        "0:6:6",
        "--dist",
        "0.8:2.0:0.6",
        "--bands",
        "100:200:10",
        "--out",
        out_csv.to_str().unwrap(),
    ]);
    let text = std::fs::read_to_string(&out_csv).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "theta_deg,phi_deg,dist_m,response_db");
    // 12 azimuths × 1 elevation × 2 distances
    assert_eq!(lines.len(), 1 + 12 * 2);
    let max = lines[1..]
        .iter()
        .map(|l| l.rsplit(',').next().unwrap().parse::<f64>().unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(max.abs() < 1e-9, "responses should be normalized to 0 dB max");
}
