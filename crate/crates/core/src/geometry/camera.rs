use nalgebra::{Matrix2x6, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Depth at or below which a point counts as behind the camera.
pub const MIN_DEPTH: f64 = 1e-9;

/// Distortion-free pinhole camera.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinholeIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: u32,
    pub height: u32,
}

impl PinholeIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64, width: u32, height: u32) -> Result<Self> {
        let k = Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
        };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.fx > 0.0
            && self.fy > 0.0
            && self.cx > 0.0
            && self.cx < self.width as f64
            && self.cy > 0.0
            && self.cy < self.height as f64;
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(format!("invalid intrinsics {self:?}")))
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::new(self.fx, 0.0, self.cx, 0.0, self.fy, self.cy, 0.0, 0.0, 1.0)
    }

    /// Whether a pixel lies inside the image rectangle `[0, w) × [0, h)`.
    pub fn contains(&self, px: &Vector2<f64>) -> bool {
        px.x >= 0.0 && px.y >= 0.0 && px.x < self.width as f64 && px.y < self.height as f64
    }

    /// Unit-depth ray `(x/z, y/z, 1)` through a pixel.
    pub fn backproject(&self, px: &Vector2<f64>) -> Vector3<f64> {
        Vector3::new((px.x - self.cx) / self.fx, (px.y - self.cy) / self.fy, 1.0)
    }
}

/// Pinhole projection. Pixels outside the image are still returned.
pub fn project(k: &PinholeIntrinsics, p: &Vector3<f64>) -> Result<Vector2<f64>> {
    if p.z <= MIN_DEPTH {
        return Err(Error::BehindCamera { z: p.z });
    }
    Ok(Vector2::new(
        k.fx * p.x / p.z + k.cx,
        k.fy * p.y / p.z + k.cy,
    ))
}

/// Derivative of the projected pixel with respect to a left perturbation
/// `exp(δξ)` applied to the camera-frame point, columns ordered
/// (translation | rotation).
pub fn projection_jacobian(k: &PinholeIntrinsics, p: &Vector3<f64>) -> Result<Matrix2x6<f64>> {
    if p.z <= MIN_DEPTH {
        return Err(Error::BehindCamera { z: p.z });
    }
    let (x, y, z) = (p.x, p.y, p.z);
    let (fx, fy) = (k.fx, k.fy);
    let zi = 1.0 / z;
    let zi2 = zi * zi;
    #[rustfmt::skip]
    let j = Matrix2x6::new(
        fx * zi, 0.0, -fx * x * zi2, -fx * x * y * zi2, fx + fx * x * x * zi2, -fx * y * zi,
        0.0, fy * zi, -fy * y * zi2, -fy - fy * y * y * zi2, fy * x * y * zi2, fy * x * zi,
    );
    Ok(j)
}
