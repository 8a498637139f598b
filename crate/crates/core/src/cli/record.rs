//! Serialized calibration results and evaluation reports.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::calib::{CalibrationResult, OuterStep, StopReason};
use crate::dataset::{read_json, write_json};
use crate::error::{Error, Result};
use crate::geometry::{rotation_error, translation_error, EulerPose, Pose};

/// Which extrinsic a record holds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// Laser → stereo.
    TSl,
    /// Thermal → stereo.
    TSt,
}

/// A calibration result as written to `laser_calib.json` / `thermal_calib.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub target: Target,
    pub pose: EulerPose,
    /// Row-major 4×4 homogeneous matrix of `pose`.
    pub matrix: [f64; 16],
    /// Cost after each outer iteration.
    pub trace: Vec<f64>,
    /// Configuration the run used.
    pub params: serde_json::Value,
    pub termination: StopReason,
    pub init: EulerPose,
    pub outer_iterations: usize,
    /// Correspondences (laser) or inliers (thermal) per frame at the final pose.
    pub counts: Vec<FrameCount>,
    pub steps: Vec<OuterStep>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameCount {
    pub frame: String,
    pub count: usize,
}

pub fn row_major(pose: &Pose) -> [f64; 16] {
    let m = pose.to_matrix();
    std::array::from_fn(|i| m[(i / 4, i % 4)])
}

impl CalibrationRecord {
    pub fn new(
        target: Target,
        result: &CalibrationResult,
        init: &Pose,
        frame_ids: &[String],
        params: serde_json::Value,
    ) -> Result<Self> {
        if frame_ids.len() != result.final_counts.len() {
            return Err(Error::Validation(format!(
                "{} frame ids for {} per-frame counts",
                frame_ids.len(),
                result.final_counts.len()
            )));
        }
        Ok(Self {
            target,
            pose: EulerPose::from_pose(&result.pose),
            matrix: row_major(&result.pose),
            trace: result.cost_trace(),
            params,
            termination: result.stop,
            init: EulerPose::from_pose(init),
            outer_iterations: result.outer_iterations(),
            counts: frame_ids
                .iter()
                .zip(&result.final_counts)
                .map(|(f, &count)| FrameCount { frame: f.clone(), count })
                .collect(),
            steps: result.steps.clone(),
        })
    }

    pub fn to_pose(&self) -> Result<Pose> {
        self.pose.to_pose()
    }

    pub fn init_pose(&self) -> Result<Pose> {
        self.init.to_pose()
    }

    /// Checks that the matrix and the Euler form describe the same pose.
    pub fn validate(&self) -> Result<()> {
        let expected = row_major(&self.to_pose()?);
        let worst = expected
            .iter()
            .zip(&self.matrix)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !(worst <= 1e-9) {
            return Err(Error::Validation(format!(
                "pose and matrix disagree by {worst:e}"
            )));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let record: Self = read_json(path)?;
        record.validate().map_err(|e| Error::parse(path, 1, e.to_string()))?;
        Ok(record)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseError {
    pub rotation_deg: f64,
    pub translation_cm: f64,
}

impl PoseError {
    pub fn between(estimate: &Pose, truth: &Pose) -> Self {
        Self {
            rotation_deg: rotation_error(estimate, truth).to_degrees(),
            translation_cm: 100.0 * translation_error(estimate, truth),
        }
    }
}

/// Written to `eval_report.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub target: Target,
    #[serde(flatten)]
    pub error: PoseError,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<PoseError>,
}
