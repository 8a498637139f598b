//! Pose algebra and pinhole projection.

use tricalib::geometry::{project, projection_jacobian, EulerPose, PinholeIntrinsics, Twist, Vec3};

fn main() -> tricalib::Result<()> {
    let pose = EulerPose::new(0.1, -0.05, 0.3, 2.0, -1.0, 30.0).to_pose()?;
    let xi = pose.log()?;
    println!("twist (t | w): {:?}", xi.to_vector().as_slice());
    let back = Twist::from_vector(&xi.to_vector()).exp()?;
    println!("exp(log(T)) error: {:.2e}", (back.to_matrix() - pose.to_matrix()).norm());
    println!("as euler: {:?}", EulerPose::from_pose(&pose));

    let k = PinholeIntrinsics::new(520.0, 520.0, 320.0, 256.0, 640, 512)?;
    let p = pose.transform_point(&Vec3::new(0.5, 0.2, 4.0));
    let u = project(&k, &p)?;
    println!("pixel {:.3}, {:.3} (inside: {})", u.x, u.y, k.contains(&u));
    println!("d(pixel)/d(twist):\n{:.3}", projection_jacobian(&k, &p)?);
    Ok(())
}
