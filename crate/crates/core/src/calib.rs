//! Outcome of an alternating calibration loop.

use serde::{Deserialize, Serialize};

use crate::geometry::Pose;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// The pose moved less than the configured twist norm.
    PoseChange,
    /// The selected point set repeated and the cost no longer decreased.
    Stable,
    MaxIterations,
}

/// One correspondence/inlier freeze followed by a solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OuterStep {
    /// Cost with the frozen selection before the solve.
    pub cost_before: f64,
    /// Cost with the frozen selection at the accepted pose.
    pub cost_after: f64,
    /// Matched or inlier points per frame.
    pub counts: Vec<usize>,
    /// Twist norm between consecutive poses.
    pub pose_change: f64,
    /// False when the solve result was discarded.
    pub accepted: bool,
}

#[derive(Clone, Debug)]
pub struct CalibrationResult {
    pub pose: Pose,
    /// Pose the alternating loop started from (after any coarse search).
    pub start: Pose,
    pub steps: Vec<OuterStep>,
    pub stop: StopReason,
    /// Per-frame counts at the final pose.
    pub final_counts: Vec<usize>,
}

impl CalibrationResult {
    /// Cost after each outer iteration.
    pub fn cost_trace(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.cost_after).collect()
    }

    pub fn outer_iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn converged(&self) -> bool {
        self.stop != StopReason::MaxIterations
    }
}
