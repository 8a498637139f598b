use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::Pose;
use crate::error::Result;

/// Human-facing {x, y, z, roll, pitch, yaw} form of a pose.
///
/// Angles are degrees and compose as intrinsic Z-Y-X:
/// `R = Rz(yaw) · Ry(pitch) · Rx(roll)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct EulerPose {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll_deg: f64,
    pub pitch_deg: f64,
    pub yaw_deg: f64,
}

impl EulerPose {
    pub fn new(x: f64, y: f64, z: f64, roll_deg: f64, pitch_deg: f64, yaw_deg: f64) -> Self {
        Self {
            x,
            y,
            z,
            roll_deg,
            pitch_deg,
            yaw_deg,
        }
    }

    pub fn to_pose(&self) -> Result<Pose> {
        Pose::new(
            rotation_from_euler(
                self.roll_deg.to_radians(),
                self.pitch_deg.to_radians(),
                self.yaw_deg.to_radians(),
            ),
            Vector3::new(self.x, self.y, self.z),
        )
    }

    pub fn from_pose(pose: &Pose) -> Self {
        let (roll, pitch, yaw) = euler_from_rotation(pose.rotation());
        let t = pose.translation();
        Self {
            x: t.x,
            y: t.y,
            z: t.z,
            roll_deg: roll.to_degrees(),
            pitch_deg: pitch.to_degrees(),
            yaw_deg: yaw.to_degrees(),
        }
    }
}

/// Rotation for roll/pitch/yaw in radians.
pub fn rotation_from_euler(roll: f64, pitch: f64, yaw: f64) -> Matrix3<f64> {
    let (sr, cr) = roll.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let (sy, cy) = yaw.sin_cos();
    Matrix3::new(
        cy * cp,
        cy * sp * sr - sy * cr,
        cy * sp * cr + sy * sr,
        sy * cp,
        sy * sp * sr + cy * cr,
        sy * sp * cr - cy * sr,
        -sp,
        cp * sr,
        cp * cr,
    )
}

/// Inverse of [`rotation_from_euler`]; ill-conditioned at pitch = ±90°.
pub fn euler_from_rotation(r: &Matrix3<f64>) -> (f64, f64, f64) {
    let pitch = (-r[(2, 0)]).atan2((r[(2, 1)].powi(2) + r[(2, 2)].powi(2)).sqrt());
    let roll = r[(2, 1)].atan2(r[(2, 2)]);
    let yaw = r[(1, 0)].atan2(r[(0, 0)]);
    (roll, pitch, yaw)
}
