//! Rigid transforms, their Lie-algebra coordinates and the pinhole camera.
//!
//! Poses map source-frame coordinates into the target frame. The extrinsics
//! handled by this crate follow the naming `T_<target><source>`:
//! `T_SL` laser → stereo, `T_ST` thermal → stereo and `T_LR` right → left.
//! Twists are ordered (translation | rotation) and optimizers update poses by
//! left multiplication, `T ← exp(δξ) · T`.

mod camera;
mod euler;
mod se3;

pub use camera::{project, projection_jacobian, PinholeIntrinsics, MIN_DEPTH};
pub use euler::{euler_from_rotation, rotation_from_euler, EulerPose};
pub use se3::{
    exp_map, hat, log_map, nearest_rotation, rotation_error, translation_error, Pose, Twist,
    ORTHONORMAL_TOLERANCE,
};

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;
