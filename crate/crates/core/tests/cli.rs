mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use tricalib::calib::{CalibrationResult, StopReason};
use tricalib::cli::{
    cmd_calibrate_laser, cmd_calibrate_thermal, cmd_evaluate, cmd_overlay, cmd_synth, CalibrationRecord, Config,
    OverlayMode, OverlayRequest, SynthSource, Target, LASER_CALIB, THERMAL_CALIB,
};
use tricalib::dataset::{load_ground_truth, DatasetManifest, GROUND_TRUTH};
use tricalib::geometry::{EulerPose, Pose};
use tricalib::image::{save_gray, GrayImage};
use tricalib::synth::{perturb_pose, GroundTruth, SceneSpec};
use tricalib::Error;

use common::{copy_dir, files, suite_dataset};

fn truth() -> GroundTruth {
    load_ground_truth(&suite_dataset().join(GROUND_TRUTH)).unwrap()
}

fn laser_init() -> EulerPose {
    EulerPose::from_pose(&perturb_pose(&truth().t_sl(), (8.0, 12.0), (0.16, 0.24), 3))
}

/// Laser calibration of the suite dataset, written once.
fn laser_run() -> &'static (tempfile::TempDir, CalibrationRecord) {
    static RUN: OnceLock<(tempfile::TempDir, CalibrationRecord)> = OnceLock::new();
    RUN.get_or_init(|| {
        let out = tempfile::tempdir().unwrap();
        let record = cmd_calibrate_laser(suite_dataset(), &laser_init(), &Config::default(), out.path()).unwrap();
        (out, record)
    })
}

fn laser_calib() -> PathBuf {
    laser_run().0.path().join(LASER_CALIB)
}

/// A record holding `pose` as if a calibration had produced it.
fn record_file(dir: &Path, name: &str, target: Target, pose: Pose) -> PathBuf {
    let ids = DatasetManifest::load(suite_dataset()).unwrap().frame_ids();
    let result = CalibrationResult {
        pose,
        start: pose,
        steps: vec![],
        stop: StopReason::PoseChange,
        final_counts: vec![0; ids.len()],
    };
    let path = dir.join(name);
    CalibrationRecord::new(target, &result, &pose, &ids, serde_json::json!({}))
        .unwrap()
        .save(&path)
        .unwrap();
    path
}

#[test]
fn laser_then_thermal_then_evaluate() {
    let (out, record) = laser_run();
    assert_eq!(record.target, Target::TSl);
    assert_eq!(record.counts.len(), 6);
    assert_eq!(record.trace.len(), record.outer_iterations);

    let report = cmd_evaluate(&out.path().join(LASER_CALIB), &suite_dataset().join(GROUND_TRUTH), None).unwrap();
    let init = report.init.unwrap();
    assert!((8.0..=12.0).contains(&init.rotation_deg) && (16.0..=24.0).contains(&init.translation_cm), "{init:?}");
    assert!(report.error.rotation_deg < 1.0 && report.error.translation_cm < 5.0, "{report:?}");

    let init = EulerPose::from_pose(&perturb_pose(&truth().t_st(), (4.0, 6.0), (0.08, 0.12), 11));
    let thermal = cmd_calibrate_thermal(suite_dataset(), &init, &laser_calib(), &Config::default(), out.path()).unwrap();
    assert_eq!(thermal.target, Target::TSt);
    assert!(thermal.outer_iterations <= 20);
    let report_path = out.path().join("eval_report.json");
    let report = cmd_evaluate(&out.path().join(THERMAL_CALIB), &suite_dataset().join(GROUND_TRUTH), Some(&report_path)).unwrap();
    assert!(report.error.rotation_deg < 0.5 && report.error.translation_cm < 4.0, "{report:?}");
    let written: serde_json::Value = serde_json::from_str(&fs::read_to_string(report_path).unwrap()).unwrap();
    assert_eq!(written["target"], "t_st");
    assert!(written["rotation_deg"].as_f64().unwrap() < 0.5);
}

#[test]
fn calibration_reruns_are_byte_identical() {
    let again = tempfile::tempdir().unwrap();
    cmd_calibrate_laser(suite_dataset(), &laser_init(), &Config::default(), again.path()).unwrap();
    assert_eq!(
        fs::read(laser_calib()).unwrap(),
        fs::read(again.path().join(LASER_CALIB)).unwrap()
    );
}

#[test]
fn record_snapshot_holds_overrides() {
    let mut config = Config::default();
    config.set("icp.max_iterations=3").unwrap();
    let out = tempfile::tempdir().unwrap();
    let record = cmd_calibrate_laser(suite_dataset(), &laser_init(), &config, out.path()).unwrap();
    assert_eq!(record.params["icp"]["max_iterations"], 3);
    assert_eq!(record.outer_iterations, 3);
    assert_eq!(record.termination, StopReason::MaxIterations);
    let back = CalibrationRecord::load(&out.path().join(LASER_CALIB)).unwrap();
    assert_eq!(back, record);
}

#[test]
fn from_truth_stays_at_the_sampling_bias() {
    // Stereo points and laser returns never coincide, so the noiseless
    // optimum sits a little off the true pose; see the mficp fixed-point test
    // for the exact case.
    let out = tempfile::tempdir().unwrap();
    let record = cmd_calibrate_laser(suite_dataset(), &EulerPose::from_pose(&truth().t_sl()), &Config::default(), out.path()).unwrap();
    let report = cmd_evaluate(&out.path().join(LASER_CALIB), &suite_dataset().join(GROUND_TRUTH), None).unwrap();
    assert_eq!(report.init.unwrap().rotation_deg, 0.0);
    assert!(report.error.rotation_deg < 0.5 && report.error.translation_cm < 3.0, "{report:?}");
    assert!(record.trace.last().unwrap() <= &record.steps[0].cost_before);
}

#[test]
fn overlays_with_true_calibration_follow_edges() {
    let dir = tempfile::tempdir().unwrap();
    let t = truth();
    let laser = record_file(dir.path(), "laser.json", Target::TSl, t.t_sl());
    let thermal = record_file(dir.path(), "thermal.json", Target::TSt, t.t_st());
    let config = Config::default();
    for frame in ["0000", "0003"] {
        let out = dir.path().join(format!("thermal_{frame}.png"));
        let req = OverlayRequest {
            dataset: suite_dataset(),
            laser_calib: &laser,
            thermal_calib: Some(&thermal),
            frame,
            mode: OverlayMode::EdgesOnThermal,
            out: &out,
        };
        let stats = cmd_overlay(&req, &config).unwrap();
        assert!(out.is_file());
        assert!(stats.marks > 500, "{stats:?}");
        assert!(stats.near_edge_fraction.unwrap() >= 0.95, "{stats:?}");

        let out = dir.path().join(format!("rgb_{frame}.png"));
        let stats = cmd_overlay(
            &OverlayRequest {
                mode: OverlayMode::LaserOnRgb,
                out: &out,
                ..req
            },
            &config,
        )
        .unwrap();
        assert!(stats.marks > 10_000 && stats.dropped > 0, "{stats:?}");
        assert!(stats.near_edge_fraction.unwrap() >= 0.95, "{stats:?}");
    }
}

#[test]
fn overlay_depth_filter_and_unknown_frame() {
    let dir = tempfile::tempdir().unwrap();
    let laser = record_file(dir.path(), "laser.json", Target::TSl, truth().t_sl());
    let out = dir.path().join("o.png");
    let mut config = Config::default();
    config.overlay.depth_max = 0.0;
    let req = OverlayRequest {
        dataset: suite_dataset(),
        laser_calib: &laser,
        thermal_calib: None,
        frame: "0001",
        mode: OverlayMode::LaserOnRgb,
        out: &out,
    };
    let stats = cmd_overlay(&req, &config).unwrap();
    assert_eq!(stats.marks, 0);
    assert!(out.is_file());

    let err = cmd_overlay(&OverlayRequest { frame: "42", ..req }, &config).unwrap_err();
    match err {
        Error::UnknownFrame { id, valid } => {
            assert_eq!(id, "42");
            assert_eq!(valid.len(), 6);
        }
        other => panic!("{other:?}"),
    }
    let err = cmd_overlay(
        &OverlayRequest {
            mode: OverlayMode::EdgesOnThermal,
            ..req
        },
        &config,
    );
    assert!(matches!(err, Err(Error::InvalidArgument(_))));
}

#[test]
fn missing_matches_is_actionable() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(suite_dataset(), dir.path());
    let mut manifest = DatasetManifest::load(dir.path()).unwrap();
    manifest.frames[2].matches = None;
    manifest.save().unwrap();
    let msg = cmd_calibrate_laser(dir.path(), &laser_init(), &Config::default(), dir.path())
        .unwrap_err()
        .to_string();
    assert!(msg.contains("frame 0002") && msg.contains("matches.csv"), "{msg}");
}

#[test]
fn blank_thermal_frame_is_skipped() {
    let dir = tempfile::tempdir().unwrap();
    copy_dir(suite_dataset(), dir.path());
    let mut manifest = DatasetManifest::load(dir.path()).unwrap();
    manifest.frames[3].thermal_edges = None;
    manifest.save().unwrap();
    let k = manifest.k_thermal;
    save_gray(
        &dir.path().join(&manifest.frames[3].thermal),
        &GrayImage::new(k.width as usize, k.height as usize, 40.0),
    )
    .unwrap();
    let init = EulerPose::from_pose(&perturb_pose(&truth().t_st(), (4.0, 6.0), (0.08, 0.12), 5));
    let record = cmd_calibrate_thermal(dir.path(), &init, &laser_calib(), &Config::default(), dir.path()).unwrap();
    let frames: Vec<&str> = record.counts.iter().map(|c| c.frame.as_str()).collect();
    assert_eq!(frames, ["0000", "0001", "0002", "0004", "0005"]);
    let report = cmd_evaluate(&dir.path().join(THERMAL_CALIB), &dir.path().join(GROUND_TRUTH), None).unwrap();
    assert!(report.error.rotation_deg < 0.5 && report.error.translation_cm < 4.0, "{report:?}");
}

#[test]
fn zero_threshold_is_degenerate() {
    let mut config = Config::default();
    config.set("reae.inlier_threshold=0").unwrap();
    let out = tempfile::tempdir().unwrap();
    let init = EulerPose::from_pose(&truth().t_st());
    let err = cmd_calibrate_thermal(suite_dataset(), &init, &laser_calib(), &config, out.path()).unwrap_err();
    assert!(matches!(err, Error::DegenerateProblem(_)), "{err:?}");
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn evaluate_constructed_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let gt = dir.path().join(GROUND_TRUTH);
    fs::copy(suite_dataset().join(GROUND_TRUTH), &gt).unwrap();
    let t = truth().t_st();

    let exact = record_file(dir.path(), "exact.json", Target::TSt, t);
    let r = cmd_evaluate(&exact, &gt, None).unwrap();
    assert!(r.error.rotation_deg < 1e-6 && r.error.translation_cm < 1e-12, "{r:?}");

    let yaw = EulerPose::new(0.0, 0.0, 0.0, 0.0, 0.0, 2.0).to_pose().unwrap();
    let rotated = Pose::new(yaw.rotation() * t.rotation(), *t.translation()).unwrap();
    let r = cmd_evaluate(&record_file(dir.path(), "yaw.json", Target::TSt, rotated), &gt, None).unwrap();
    assert!((r.error.rotation_deg - 2.0).abs() < 5e-4, "{r:?}");
    assert!(r.error.translation_cm < 1e-12);

    for seed in 0..20 {
        let p = perturb_pose(&t, (8.0, 12.0), (0.16, 0.24), seed);
        let r = cmd_evaluate(&record_file(dir.path(), "p.json", Target::TSt, p), &gt, None).unwrap();
        assert!((8.0 - 1e-6..=12.0 + 1e-6).contains(&r.error.rotation_deg), "{r:?}");
        assert!((16.0 - 1e-6..=24.0 + 1e-6).contains(&r.error.translation_cm), "{r:?}");
    }

    fs::write(dir.path().join("bad.json"), "{ \"pose\": ").unwrap();
    assert!(matches!(cmd_evaluate(&dir.path().join("bad.json"), &gt, None), Err(Error::Parse { .. })));
}

#[test]
fn synth_from_toml_spec_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = SceneSpec::random(21, 1);
    spec.rig.laser.rings = 32;
    spec.rig.laser.columns = 512;
    spec.sampling.render_supersampling = 1;
    spec.noise.laser_range_sigma = 0.01;
    let spec_path = dir.path().join("scene.toml");
    fs::write(&spec_path, toml::to_string(&spec).unwrap()).unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    cmd_synth(&SynthSource::File(spec_path.clone()), &a).unwrap();
    cmd_synth(&SynthSource::File(spec_path), &b).unwrap();
    let listing = files(&a);
    assert_eq!(listing, files(&b));
    assert!(listing.len() >= 8);
    for f in &listing {
        assert!(fs::read(a.join(f)).unwrap() == fs::read(b.join(f)).unwrap(), "{} differs", f.display());
    }
}

fn tricalib() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tricalib"))
}

#[test]
fn binary_exit_codes() {
    let ds = suite_dataset();
    let laser = laser_calib();
    let out = tempfile::tempdir().unwrap();
    let thermal = |extra: &[&str]| {
        tricalib()
            .arg("calibrate-thermal")
            .arg(ds)
            .arg("--laser-calib")
            .arg(&laser)
            .arg("--out")
            .arg(out.path())
            .args(extra)
            .output()
            .unwrap()
    };
    let t = truth().t_st;
    let init = format!("--init={},{},{},{},{},{}", t.x, t.y, t.z, t.roll_deg, t.pitch_deg, t.yaw_deg);

    let run = thermal(&[&init, "--set", "reae.inlier_threshold=0"]);
    assert_eq!(run.status.code(), Some(3), "{}", String::from_utf8_lossy(&run.stderr));

    // rolled half a turn: every edge point lands behind the thermal camera
    let flipped = format!("--init={},{},{},{},{},{}", t.x, t.y, t.z, t.roll_deg + 180.0, t.pitch_deg, t.yaw_deg);
    let run = thermal(&[&flipped]);
    assert_eq!(run.status.code(), Some(4), "{}", String::from_utf8_lossy(&run.stderr));

    let run = thermal(&[&init, "--set", "reae.no_such_key=1"]);
    assert_eq!(run.status.code(), Some(2));

    let run = tricalib().arg("calibrate-laser").arg(out.path().join("nowhere")).output().unwrap();
    assert_eq!(run.status.code(), Some(2));

    let run = tricalib()
        .args(["overlay", "--frame", "9999", "--out"])
        .arg(out.path().join("o.png"))
        .arg("--laser-calib")
        .arg(&laser)
        .arg(ds)
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("0005"));

    let run = thermal(&[&init]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let run = tricalib().arg("evaluate").arg(out.path().join(THERMAL_CALIB)).arg("--ground-truth").arg(ds.join(GROUND_TRUTH)).output().unwrap();
    assert!(run.status.success());
    assert!(out.path().join("eval_report.json").is_file());
}
