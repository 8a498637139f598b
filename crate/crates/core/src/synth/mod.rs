//! Deterministic box-world scenes rendered into every sensor stream.
//!
//! World axes: x right, y forward, z up. The stereo (left camera) and thermal
//! frames use the camera convention x right, y down, z forward; the laser
//! frame is x forward, y left, z up. Every scene is a set of axis-aligned
//! boxes; a wall is just a thin box.

mod generate;
mod perturb;
mod raycast;

use nalgebra::Matrix3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use generate::{frame_id, generate, predict_laser_edges, GroundTruth, SynthDataset, SynthFrame};
pub use perturb::perturb_pose;
pub use raycast::{cast, visible, BoxSpec, Hit};

use crate::error::{Error, Result};
use crate::geometry::{rotation_from_euler, EulerPose, PinholeIntrinsics, Pose};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaserSpec {
    pub rings: usize,
    pub columns: usize,
    pub min_elevation_deg: f64,
    pub max_elevation_deg: f64,
    pub max_range: f64,
}

impl Default for LaserSpec {
    fn default() -> Self {
        Self {
            rings: 128,
            columns: 2048,
            min_elevation_deg: -30.0,
            max_elevation_deg: 30.0,
            max_range: 100.0,
        }
    }
}

impl LaserSpec {
    /// Unit ray of a cell in the laser frame. Column 0 looks backwards and
    /// azimuth grows counter-clockwise seen from above.
    pub fn direction(&self, ring: usize, col: usize) -> crate::geometry::Vec3 {
        let span = self.max_elevation_deg - self.min_elevation_deg;
        let elev = if self.rings > 1 {
            self.min_elevation_deg + span * ring as f64 / (self.rings - 1) as f64
        } else {
            0.5 * (self.min_elevation_deg + self.max_elevation_deg)
        }
        .to_radians();
        self.direction_at(elev, self.azimuth(col as f64))
    }

    pub fn azimuth(&self, col: f64) -> f64 {
        std::f64::consts::TAU * col / self.columns as f64 - std::f64::consts::PI
    }

    pub fn elevation(&self, ring: usize) -> f64 {
        self.direction(ring, 0).z.asin()
    }

    pub fn direction_at(&self, elev: f64, az: f64) -> crate::geometry::Vec3 {
        crate::geometry::Vec3::new(elev.cos() * az.cos(), elev.cos() * az.sin(), elev.sin())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigSpec {
    pub left: PinholeIntrinsics,
    pub right: PinholeIntrinsics,
    pub thermal: PinholeIntrinsics,
    /// Right camera → left camera.
    pub t_lr: EulerPose,
    /// Laser → stereo.
    pub t_sl: EulerPose,
    /// Thermal → stereo.
    pub t_st: EulerPose,
    pub laser: LaserSpec,
}

/// Laser axes expressed in the stereo frame: forward = +z, left = −x, up = −y.
pub fn laser_mount_rotation() -> Matrix3<f64> {
    Matrix3::new(0.0, -1.0, 0.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0)
}

impl Default for RigSpec {
    fn default() -> Self {
        let mount = Pose::new(
            laser_mount_rotation() * rotation_from_euler(0.8f64.to_radians(), -0.6f64.to_radians(), 1.2f64.to_radians()),
            crate::geometry::Vec3::new(0.11, -0.10, 0.02),
        )
        .expect("mount rotation is orthonormal");
        Self {
            left: PinholeIntrinsics::new(800.0, 800.0, 512.0, 384.0, 1024, 768).expect("valid"),
            right: PinholeIntrinsics::new(800.0, 800.0, 512.0, 384.0, 1024, 768).expect("valid"),
            thermal: PinholeIntrinsics::new(520.0, 520.0, 320.0, 256.0, 640, 512).expect("valid"),
            t_lr: EulerPose::new(0.2227, 0.0, 0.0, 0.0, 0.0, 0.0),
            t_sl: EulerPose::from_pose(&mount),
            t_st: EulerPose::new(0.06, 0.02, 0.01, 0.7, -0.9, 0.5),
            laser: LaserSpec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Gaussian range noise of the laser, meters.
    pub laser_range_sigma: f64,
    /// Isotropic Gaussian noise on triangulated stereo points, meters.
    pub stereo_sigma: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingSpec {
    /// Correspondences sampled at random left-image pixels.
    pub interior_points: usize,
    /// Spacing of correspondences along box outlines, left-image pixels.
    pub edge_spacing_px: f64,
    /// Samples closer than this to an image border are skipped.
    pub border_px: f64,
    /// Supersampling factor per axis for rendered images; 0 disables rendering.
    pub render_supersampling: usize,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        Self {
            interior_points: 1500,
            edge_spacing_px: 3.0,
            border_px: 3.0,
            render_supersampling: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub boxes: Vec<BoxSpec>,
    pub rig: RigSpec,
    /// Left-camera pose per frame: position in world, rotation in world axes
    /// applied on top of a camera looking along +y.
    pub frames: Vec<EulerPose>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub sampling: SamplingSpec,
    /// The first `backdrop` boxes share one gray level, so junctions between
    /// them (wall and floor) leave no intensity edge.
    #[serde(default = "default_backdrop")]
    pub backdrop: usize,
    pub seed: u64,
}

fn default_backdrop() -> usize {
    1
}

/// Camera axes (x right, y down, z forward) expressed in the world.
pub fn camera_base_rotation() -> Matrix3<f64> {
    Matrix3::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, -1.0, 0.0)
}

impl SceneSpec {
    pub fn validate(&self) -> Result<()> {
        if self.boxes.is_empty() {
            return Err(Error::InvalidArgument("scene has no geometry".into()));
        }
        if let Some(b) = self.boxes.iter().find(|b| !b.is_valid()) {
            return Err(Error::InvalidArgument(format!("degenerate box {b:?}")));
        }
        if self.backdrop > self.boxes.len() {
            return Err(Error::InvalidArgument(format!(
                "backdrop of {} boxes in a scene of {}",
                self.backdrop,
                self.boxes.len()
            )));
        }
        if self.frames.is_empty() {
            return Err(Error::InvalidArgument("scene has no frames".into()));
        }
        let l = &self.rig.laser;
        if l.rings == 0 || l.columns == 0 || !(l.max_elevation_deg >= l.min_elevation_deg) {
            return Err(Error::InvalidArgument(format!("invalid laser spec {l:?}")));
        }
        for k in [&self.rig.left, &self.rig.right, &self.rig.thermal] {
            k.validate()?;
        }
        if self.noise.laser_range_sigma < 0.0 || self.noise.stereo_sigma < 0.0 {
            return Err(Error::InvalidArgument("noise sigmas must be non-negative".into()));
        }
        Ok(())
    }

    /// World pose of the left camera for frame `i`.
    pub fn rig_pose(&self, i: usize) -> Result<Pose> {
        let f = &self.frames[i];
        let r = rotation_from_euler(f.roll_deg.to_radians(), f.pitch_deg.to_radians(), f.yaw_deg.to_radians());
        Pose::new_orthonormalized(r * camera_base_rotation(), crate::geometry::Vec3::new(f.x, f.y, f.z))
    }

    /// Randomized box scene: a wall at 9 m over a floor, and 2–4 boxes at
    /// separated depths kept clear of the sensor centres so every outline is
    /// stable across the rig. The two nearest boxes sit on opposite sides.
    pub fn random(seed: u64, n_frames: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut boxes = vec![
            BoxSpec::new([-12.0, 9.0, -3.0], [12.0, 9.4, 4.5]),
            // runs into the wall so its far edge stays hidden
            BoxSpec::new([-12.0, 0.5, -1.8], [12.0, 9.2, -1.6]),
        ];
        let n_boxes = rng.random_range(2..=4);
        let mut slots: Vec<(f64, f64)> = vec![(2.6, 3.3), (3.9, 4.6), (5.2, 5.9), (6.5, 7.3)];
        for i in (1..slots.len()).rev() {
            slots.swap(i, rng.random_range(0..=i));
        }
        let first_side = rng.random_range(0..2);
        slots[..n_boxes].sort_by(|a, b| a.0.total_cmp(&b.0));
        for (i, &(y0, y1)) in slots.iter().take(n_boxes).enumerate() {
            let depth = 0.5 * (y0 + y1);
            // horizontal extent well inside the left camera's view at this depth
            let reach = 0.45 * depth;
            let side = match i {
                0 => first_side,
                1 => 1 - first_side,
                _ => rng.random_range(0..3),
            };
            let (x0, x1) = match side {
                0 => {
                    let x1: f64 = rng.random_range(-0.9..-0.6);
                    (rng.random_range((-reach).min(x1 - 0.5)..x1 - 0.4), x1)
                }
                1 => {
                    let x0: f64 = rng.random_range(0.9..1.2);
                    (x0, rng.random_range(x0 + 0.4..(x0 + 0.5).max(reach)))
                }
                _ => (rng.random_range(-1.3..-0.7), rng.random_range(1.0..1.5)),
            };
            let z0 = rng.random_range(-1.2..-0.6) * depth / 4.0;
            let z1 = rng.random_range(0.7..1.2) * depth / 4.0;
            boxes.push(BoxSpec::new(
                [x0, y0, z0.clamp(-1.4, -0.6)],
                [x1, y0 + rng.random_range(0.4..(y1 - y0)), z1.max(0.65)],
            ));
        }
        let frames = (0..n_frames)
            .map(|_| {
                EulerPose::new(
                    rng.random_range(-0.1..0.1),
                    rng.random_range(-0.2..0.2),
                    rng.random_range(-0.05..0.05),
                    // tilted down a little so the floor is in view
                    rng.random_range(-8.0..2.0),
                    rng.random_range(-6.0..6.0),
                    rng.random_range(-12.0..12.0),
                )
            })
            .collect();
        Self {
            boxes,
            rig: RigSpec::default(),
            frames,
            noise: NoiseSpec::default(),
            sampling: SamplingSpec::default(),
            backdrop: 2,
            seed,
        }
    }

    /// The four-scene evaluation suite.
    pub fn suite(n_frames: usize) -> Vec<Self> {
        (0..4).map(|i| Self::random(1000 + i, n_frames)).collect()
    }

    pub fn with_noise(mut self, laser_range_sigma: f64, stereo_sigma: f64) -> Self {
        self.noise = NoiseSpec {
            laser_range_sigma,
            stereo_sigma,
        };
        self
    }
}
