//! Command implementations behind the `tricalib` binary.

pub mod config;
pub mod overlay;
pub mod record;

use std::fs;
use std::path::{Path, PathBuf};

use log::info;

pub use config::Config;
pub use overlay::{OverlayMode, OverlayStats};
pub use record::{CalibrationRecord, ErrorReport, PoseError, Target};

use crate::dataset::{load_ground_truth, write_json, write_synth_dataset, DatasetManifest};
use crate::error::{Error, Result};
use crate::geometry::{EulerPose, Pose};
use crate::mficp::calibrate_laser;
use crate::pipeline::{edge_projection_sets, icp_frames, process_frame, process_frames, thermal_edge_map};
use crate::reae::calibrate_thermal;
use crate::synth::{generate, SceneSpec};

use overlay::{near_edge_fraction, project_points, render_overlay, to_camera, Layer, LASER_COLOR, STEREO_COLOR};

pub const LASER_CALIB: &str = "laser_calib.json";
pub const THERMAL_CALIB: &str = "thermal_calib.json";
pub const EVAL_REPORT: &str = "eval_report.json";

fn snapshot(config: &Config) -> Result<serde_json::Value> {
    serde_json::to_value(config).map_err(|e| Error::Validation(e.to_string()))
}

/// Estimates `T_SL` and writes `laser_calib.json` into `out_dir`.
pub fn cmd_calibrate_laser(dataset: &Path, init: &EulerPose, config: &Config, out_dir: &Path) -> Result<CalibrationRecord> {
    let manifest = DatasetManifest::load(dataset)?;
    let frames = manifest.load_frames()?;
    let processed = process_frames(&frames, &manifest.stereo_rig()?, &config.stereo, &config.laser_edges)?;
    let init = init.to_pose()?;
    let result = calibrate_laser(&icp_frames(&processed)?, &init, &config.icp)?;
    info!(
        "laser calibration: {:?} after {} iterations",
        result.stop,
        result.outer_iterations()
    );
    let record = CalibrationRecord::new(Target::TSl, &result, &init, &manifest.frame_ids(), snapshot(config)?)?;
    record.save(&out_dir.join(LASER_CALIB))?;
    Ok(record)
}

/// Estimates `T_ST` given a laser calibration and writes `thermal_calib.json`.
pub fn cmd_calibrate_thermal(
    dataset: &Path,
    init: &EulerPose,
    laser_calib: &Path,
    config: &Config,
    out_dir: &Path,
) -> Result<CalibrationRecord> {
    let laser = CalibrationRecord::load(laser_calib)?;
    if laser.target != Target::TSl {
        return Err(Error::InvalidArgument(format!("{} does not hold a laser calibration", laser_calib.display())));
    }
    let manifest = DatasetManifest::load(dataset)?;
    let frames = manifest.load_frames()?;
    let processed = process_frames(&frames, &manifest.stereo_rig()?, &config.stereo, &config.laser_edges)?;
    let (ids, sets) = edge_projection_sets(
        &frames,
        &processed,
        &laser.to_pose()?,
        &manifest.k_thermal,
        config.thermal.edge_source,
        &config.canny,
    )?;
    let init = init.to_pose()?;
    let result = calibrate_thermal(&sets, &init, &config.reae)?;
    info!(
        "thermal calibration: {:?} after {} iterations",
        result.stop,
        result.outer_iterations()
    );
    let record = CalibrationRecord::new(Target::TSt, &result, &init, &ids, snapshot(config)?)?;
    record.save(&out_dir.join(THERMAL_CALIB))?;
    Ok(record)
}

/// Compares a calibration record with `ground_truth.json`. Writes the report
/// to `out` when given.
pub fn cmd_evaluate(result: &Path, ground_truth: &Path, out: Option<&Path>) -> Result<ErrorReport> {
    let record = CalibrationRecord::load(result)?;
    let truth = load_ground_truth(ground_truth)?;
    let truth = match record.target {
        Target::TSl => truth.t_sl,
        Target::TSt => truth.t_st,
    }
    .to_pose()?;
    let report = ErrorReport {
        target: record.target,
        error: PoseError::between(&record.to_pose()?, &truth),
        init: Some(PoseError::between(&record.init_pose()?, &truth)),
    };
    if let Some(out) = out {
        write_json(out, &report)?;
    }
    Ok(report)
}

pub struct OverlayRequest<'a> {
    pub dataset: &'a Path,
    pub laser_calib: &'a Path,
    /// Required for [`OverlayMode::EdgesOnThermal`].
    pub thermal_calib: Option<&'a Path>,
    pub frame: &'a str,
    pub mode: OverlayMode,
    pub out: &'a Path,
}

/// Draws one frame's projections. Edge marks are checked against the
/// Sobel edges of the left image or the frame's thermal edges.
pub fn cmd_overlay(req: &OverlayRequest, config: &Config) -> Result<OverlayStats> {
    let manifest = DatasetManifest::load(req.dataset)?;
    let entry = manifest.entry(req.frame)?;
    let t_sl = CalibrationRecord::load(req.laser_calib)?.to_pose()?;
    let frame = manifest.load_frame(entry)?;
    let processed = process_frame(&frame, &manifest.stereo_rig()?, &config.stereo, &config.laser_edges)?;
    let opts = &config.overlay;
    match req.mode {
        OverlayMode::LaserOnRgb => {
            let points = to_camera(processed.laser.cloud.points(), &t_sl);
            let edges = to_camera(&processed.laser.cloud.edge_points(), &t_sl);
            let reference = crate::stereo::sobel_edges(&frame.left, config.stereo.sobel_threshold);
            let all = render_overlay(
                req.out,
                &frame.left,
                &manifest.k_left,
                &[Layer { points: &points, color: LASER_COLOR }],
                opts.depth_max,
                opts.marker_radius,
                None,
            )?;
            // the edge statistic only concerns silhouette returns
            let marks = project_points(&edges, &manifest.k_left, opts.depth_max);
            let near = if reference.is_empty() { None } else { Some(near_edge_fraction(&marks, &reference)?) };
            Ok(OverlayStats {
                near_edge_fraction: near,
                ..all
            })
        }
        OverlayMode::EdgesOnThermal => {
            let path = req
                .thermal_calib
                .ok_or_else(|| Error::InvalidArgument("edges-on-thermal needs a thermal calibration".into()))?;
            let t_ts = CalibrationRecord::load(path)?.to_pose()?.inverse();
            let stereo = to_camera(&processed.stereo.edge_points(), &t_ts);
            let laser = to_camera(&processed.laser.cloud.edge_points(), &t_ts.compose(&t_sl));
            let reference = thermal_edge_map(&frame, config.thermal.edge_source, &config.canny)?;
            let base = frame.thermal.as_ref().expect("dataset frames carry a thermal image");
            render_overlay(
                req.out,
                base,
                &manifest.k_thermal,
                &[
                    Layer { points: &stereo, color: STEREO_COLOR },
                    Layer { points: &laser, color: LASER_COLOR },
                ],
                opts.depth_max,
                opts.marker_radius,
                reference.as_ref(),
            )
        }
    }
}

/// Where `synth` takes its scene from.
pub enum SynthSource {
    /// A `SceneSpec` in JSON, or TOML when the extension is `.toml`.
    File(PathBuf),
    Random { seed: u64, frames: usize },
}

pub fn load_scene_spec(path: &Path) -> Result<SceneSpec> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("toml")) {
        toml::from_str(&text).map_err(|e| {
            let line = e.span().map_or(1, |s| text[..s.start].matches('\n').count() + 1);
            Error::parse(path, line, e.message().to_string())
        })
    } else {
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
    }
}

/// Generates a scene and writes it in the dataset layout.
pub fn cmd_synth(source: &SynthSource, out_dir: &Path) -> Result<DatasetManifest> {
    let spec = match source {
        SynthSource::File(p) => load_scene_spec(p)?,
        SynthSource::Random { seed, frames } => SceneSpec::random(*seed, *frames),
    };
    let ds = generate(&spec)?;
    write_synth_dataset(&ds, out_dir)
}

/// Parses `x,y,z,roll,pitch,yaw` (meters, degrees).
pub fn parse_euler(s: &str) -> Result<EulerPose> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidArgument(format!("pose '{s}': {e}")))?;
    let [x, y, z, r, p, yw] = v[..] else {
        return Err(Error::InvalidArgument(format!("pose '{s}' needs six comma-separated values")));
    };
    let pose = EulerPose::new(x, y, z, r, p, yw);
    pose.to_pose()?;
    Ok(pose)
}

pub fn identity_euler() -> EulerPose {
    EulerPose::from_pose(&Pose::identity())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_pose() {
        let p = parse_euler("0.1, -0.2,0.3,1,2,3").unwrap();
        assert_eq!(p, EulerPose::new(0.1, -0.2, 0.3, 1.0, 2.0, 3.0));
        assert!(parse_euler("1,2,3").is_err());
        assert!(parse_euler("1,2,3,4,5,x").is_err());
    }
}
