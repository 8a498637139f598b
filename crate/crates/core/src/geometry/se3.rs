use std::f64::consts::PI;
use std::ops::Mul;

use nalgebra::{Matrix3, Matrix4, Vector3, Vector6};

use crate::error::{Error, Result};

/// Tolerance on `RᵀR = I` and `det R = 1` for a valid pose.
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-9;

/// Drift above which composed rotations are projected back onto SO(3).
const REORTHONORMALIZE_THRESHOLD: f64 = 1e-7;

/// Below this rotation magnitude exp and log switch to series expansions.
const SMALL_ANGLE: f64 = 1e-8;

/// Rigid transform mapping source-frame coordinates into the target frame:
/// `p_target = R · p_source + t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Pose {
    rotation: Matrix3<f64>,
    translation: Vector3<f64>,
}

impl Default for Pose {
    fn default() -> Self {
        Self::identity()
    }
}

impl Pose {
    pub fn identity() -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation: Vector3::zeros(),
        }
    }

    /// Builds a pose, checking that `rotation` is a proper rotation matrix.
    pub fn new(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        if !rotation.iter().chain(translation.iter()).all(|v| v.is_finite()) {
            return Err(Error::InvalidArgument("pose has non-finite entries".into()));
        }
        let ortho = orthonormality_error(&rotation);
        let det = rotation.determinant();
        if ortho > ORTHONORMAL_TOLERANCE || (det - 1.0).abs() > ORTHONORMAL_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "rotation is not orthonormal (|RᵀR - I| = {ortho:e}, det = {det})"
            )));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    /// Builds a pose from an approximately orthonormal matrix by projecting it
    /// onto SO(3) first.
    pub fn new_orthonormalized(rotation: Matrix3<f64>, translation: Vector3<f64>) -> Result<Self> {
        Self::new(nearest_rotation(&rotation)?, translation)
    }

    pub fn from_translation(translation: Vector3<f64>) -> Self {
        Self {
            rotation: Matrix3::identity(),
            translation,
        }
    }

    pub fn from_matrix(m: &Matrix4<f64>) -> Result<Self> {
        let bottom = [m[(3, 0)], m[(3, 1)], m[(3, 2)], m[(3, 3)]];
        if bottom.iter().zip([0.0, 0.0, 0.0, 1.0]).any(|(a, b)| (a - b).abs() > 1e-12) {
            return Err(Error::InvalidArgument(
                "homogeneous matrix must end with row [0 0 0 1]".into(),
            ));
        }
        Self::new(
            m.fixed_view::<3, 3>(0, 0).into_owned(),
            m.fixed_view::<3, 1>(0, 3).into_owned(),
        )
    }

    pub fn rotation(&self) -> &Matrix3<f64> {
        &self.rotation
    }

    pub fn translation(&self) -> &Vector3<f64> {
        &self.translation
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rotation);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.translation);
        m
    }

    /// `self ∘ other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &Pose) -> Pose {
        let mut rotation = self.rotation * other.rotation;
        if orthonormality_error(&rotation) > REORTHONORMALIZE_THRESHOLD {
            // nearest_rotation only fails on NaN input, which cannot arise from valid poses
            rotation = nearest_rotation(&rotation).unwrap_or(rotation);
        }
        Pose {
            rotation,
            translation: self.rotation * other.translation + self.translation,
        }
    }

    pub fn inverse(&self) -> Pose {
        let rt = self.rotation.transpose();
        Pose {
            rotation: rt,
            translation: -(rt * self.translation),
        }
    }

    pub fn transform_point(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation * p + self.translation
    }

    /// Geodesic angle of the rotation, in radians, in `[0, π]`.
    pub fn rotation_angle(&self) -> f64 {
        rotation_angle(&self.rotation)
    }

    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(&self.rotation)
    }

    pub fn log(&self) -> Result<Twist> {
        log_map(self)
    }
}

impl Mul for Pose {
    type Output = Pose;

    fn mul(self, rhs: Pose) -> Pose {
        self.compose(&rhs)
    }
}

impl Mul<&Pose> for &Pose {
    type Output = Pose;

    fn mul(self, rhs: &Pose) -> Pose {
        self.compose(rhs)
    }
}

/// Element of se(3), ordered (translation | rotation).
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Twist {
    pub translation: Vector3<f64>,
    pub rotation: Vector3<f64>,
}

impl Twist {
    pub fn new(translation: Vector3<f64>, rotation: Vector3<f64>) -> Self {
        Self {
            translation,
            rotation,
        }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        Self {
            translation: v.fixed_rows::<3>(0).into_owned(),
            rotation: v.fixed_rows::<3>(3).into_owned(),
        }
    }

    pub fn to_vector(&self) -> Vector6<f64> {
        let mut v = Vector6::zeros();
        v.fixed_rows_mut::<3>(0).copy_from(&self.translation);
        v.fixed_rows_mut::<3>(3).copy_from(&self.rotation);
        v
    }

    pub fn norm(&self) -> f64 {
        self.to_vector().norm()
    }

    pub fn exp(&self) -> Result<Pose> {
        exp_map(self)
    }
}

pub fn hat(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// SE(3) exponential.
pub fn exp_map(xi: &Twist) -> Result<Pose> {
    let v = xi.to_vector();
    if !v.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidArgument("twist has non-finite components".into()));
    }
    let phi = xi.rotation;
    let theta = phi.norm();
    let w = hat(&phi);
    let w2 = w * w;
    let (a, b, c) = if theta < SMALL_ANGLE {
        (1.0, 0.5, 1.0 / 6.0)
    } else {
        let t2 = theta * theta;
        (
            theta.sin() / theta,
            (1.0 - theta.cos()) / t2,
            (theta - theta.sin()) / (t2 * theta),
        )
    };
    let rotation = Matrix3::identity() + w * a + w2 * b;
    let jacobian = Matrix3::identity() + w * b + w2 * c;
    Ok(Pose {
        rotation,
        translation: jacobian * xi.translation,
    })
}

/// SE(3) logarithm with rotation magnitude in `[0, π)`.
pub fn log_map(pose: &Pose) -> Result<Twist> {
    let r = pose.rotation();
    let theta = rotation_angle(r);
    if PI - theta < 1e-6 {
        return Err(Error::DegenerateRotation);
    }
    let skew = vee(&(r - r.transpose())) * 0.5;
    let phi = if theta < SMALL_ANGLE {
        skew
    } else {
        skew * (theta / theta.sin())
    };
    let w = hat(&phi);
    // V⁻¹ = I - ½W + c·W², c → 1/12 as θ → 0
    let c = if theta < 1e-4 {
        1.0 / 12.0 + theta * theta / 720.0
    } else {
        let half = 0.5 * theta;
        (1.0 - half * half.cos() / half.sin()) / (theta * theta)
    };
    let v_inv = Matrix3::identity() - w * 0.5 + w * w * c;
    Ok(Twist {
        translation: v_inv * pose.translation(),
        rotation: phi,
    })
}

pub(crate) fn rotation_angle(r: &Matrix3<f64>) -> f64 {
    let s = (vee(&(r - r.transpose())) * 0.5).norm();
    let c = 0.5 * (r.trace() - 1.0);
    s.atan2(c)
}

fn orthonormality_error(r: &Matrix3<f64>) -> f64 {
    (r.transpose() * r - Matrix3::identity()).norm()
}

/// Polar projection onto SO(3).
pub fn nearest_rotation(m: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    if !m.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidArgument("matrix has non-finite entries".into()));
    }
    let svd = m.svd(true, true);
    let (u, vt) = match (svd.u, svd.v_t) {
        (Some(u), Some(vt)) => (u, vt),
        _ => return Err(Error::InvalidArgument("svd failed".into())),
    };
    let mut d = Matrix3::identity();
    if (u * vt).determinant() < 0.0 {
        d[(2, 2)] = -1.0;
    }
    Ok(u * d * vt)
}

/// Geodesic distance between two rotations, radians.
pub fn rotation_error(a: &Pose, b: &Pose) -> f64 {
    rotation_angle(&(a.rotation() * b.rotation().transpose()))
}

pub fn translation_error(a: &Pose, b: &Pose) -> f64 {
    (a.translation() - b.translation()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_twist(rng: &mut impl Rng, max_angle: f64) -> Twist {
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
        .normalize();
        Twist::new(
            Vector3::new(
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
                rng.random_range(-2.0..2.0),
            ),
            axis * rng.random_range(0.0..max_angle),
        )
    }

    #[test]
    fn exp_of_zero_is_identity() {
        assert_eq!(exp_map(&Twist::zero()).unwrap(), Pose::identity());
    }

    #[test]
    fn quarter_turn_yaw() {
        let pose = exp_map(&Twist::new(Vector3::zeros(), Vector3::new(0.0, 0.0, PI / 2.0))).unwrap();
        let p = pose.transform_point(&Vector3::x());
        assert!((p - Vector3::y()).norm() < 1e-12);
        assert!(pose.translation().norm() < 1e-15);
    }

    #[test]
    fn non_finite_twist_rejected() {
        let xi = Twist::new(Vector3::new(f64::NAN, 0.0, 0.0), Vector3::zeros());
        assert!(matches!(exp_map(&xi), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn log_of_identity_is_zero() {
        assert_eq!(log_map(&Pose::identity()).unwrap().norm(), 0.0);
    }

    #[test]
    fn log_inverts_known_twist() {
        let xi = Twist::new(Vector3::new(0.1, 0.0, 0.0), Vector3::new(0.0, 0.0, 0.2));
        let back = log_map(&exp_map(&xi).unwrap()).unwrap();
        assert!((back.to_vector() - xi.to_vector()).norm() < 1e-9);
    }

    #[test]
    fn log_rejects_half_turn() {
        let pose = exp_map(&Twist::new(Vector3::zeros(), Vector3::new(PI, 0.0, 0.0))).unwrap();
        assert!(matches!(log_map(&pose), Err(Error::DegenerateRotation)));
    }

    #[test]
    fn log_exp_roundtrip_random_twists() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let xi = random_twist(&mut rng, 3.0);
            let back = log_map(&exp_map(&xi).unwrap()).unwrap();
            assert!((back.to_vector() - xi.to_vector()).norm() < 1e-9, "{xi:?} -> {back:?}");
        }
    }

    #[test]
    fn exp_log_roundtrip_random_poses() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let pose = exp_map(&random_twist(&mut rng, 3.0)).unwrap();
            let back = exp_map(&log_map(&pose).unwrap()).unwrap();
            let diff = (back.to_matrix() - pose.to_matrix()).abs().max();
            assert!(diff < 1e-9, "diff {diff}");
        }
    }

    #[test]
    fn small_angle_series_matches_closed_form() {
        let xi = Twist::new(Vector3::new(0.3, -0.2, 0.1), Vector3::new(1e-9, -2e-9, 5e-10));
        let pose = exp_map(&xi).unwrap();
        let back = log_map(&pose).unwrap();
        assert!((back.to_vector() - xi.to_vector()).norm() < 1e-15);
    }

    #[test]
    fn compose_with_inverse_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let t = exp_map(&random_twist(&mut rng, 3.0)).unwrap();
            let id = t.compose(&t.inverse());
            assert!((id.to_matrix() - Matrix4::identity()).abs().max() < 1e-12);
        }
    }

    #[test]
    fn pure_translation_moves_origin() {
        let t = Pose::from_translation(Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(t.transform_point(&Vector3::zeros()), Vector3::new(1.0, 2.0, 3.0));
    }

    #[test]
    fn compose_is_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..50 {
            let a = exp_map(&random_twist(&mut rng, 3.0)).unwrap();
            let b = exp_map(&random_twist(&mut rng, 3.0)).unwrap();
            let c = exp_map(&random_twist(&mut rng, 3.0)).unwrap();
            let lhs = (a * b) * c;
            let rhs = a * (b * c);
            assert!((lhs.to_matrix() - rhs.to_matrix()).abs().max() < 1e-10);
        }
    }

    #[test]
    fn long_composition_chain_stays_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut acc = Pose::identity();
        for _ in 0..1000 {
            acc = acc * exp_map(&random_twist(&mut rng, 3.0)).unwrap();
        }
        assert!(acc.orthonormality_error() < 1e-9);
        assert!((acc.rotation().determinant() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn new_rejects_non_rotation() {
        let m = Matrix3::new(1.0, 0.1, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(Pose::new(m, Vector3::zeros()).is_err());
        assert!(Pose::new_orthonormalized(m, Vector3::zeros()).is_ok());
        let reflection = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, -1.0));
        assert!(Pose::new(reflection, Vector3::zeros()).is_err());
    }

    #[test]
    fn matrix_roundtrip() {
        let pose = exp_map(&Twist::new(Vector3::new(1.0, -2.0, 0.5), Vector3::new(0.3, 0.2, -0.1))).unwrap();
        assert_eq!(Pose::from_matrix(&pose.to_matrix()).unwrap(), pose);
    }

    #[test]
    fn rotation_error_of_known_yaw() {
        let a = exp_map(&Twist::new(Vector3::zeros(), Vector3::new(0.0, 0.0, 2f64.to_radians()))).unwrap();
        assert!((rotation_error(&a, &Pose::identity()).to_degrees() - 2.0).abs() < 1e-12);
    }
}
