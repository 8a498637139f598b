//! Midpoint triangulation of a rectified-free stereo pair.

use tricalib::geometry::{project, EulerPose, PinholeIntrinsics, Vec3};
use tricalib::stereo::{triangulate_matches, PixelMatch, StereoParams, StereoRig};

fn main() -> tricalib::Result<()> {
    let k = PinholeIntrinsics::new(700.0, 700.0, 512.0, 384.0, 1024, 768)?;
    // right camera 12 cm to the right of the left one, slightly toed in
    let t_lr = EulerPose::new(0.12, 0.0, 0.0, 0.0, -0.5, 0.0).to_pose()?;
    let rig = StereoRig { left: k, right: k, t_lr };
    let t_rl = t_lr.inverse();

    let truth = [Vec3::new(0.3, -0.2, 2.0), Vec3::new(-1.0, 0.5, 8.0), Vec3::new(0.0, 0.0, 90.0)];
    let matches: Vec<PixelMatch> = truth
        .iter()
        .map(|p| Ok(PixelMatch { left: project(&k, p)?, right: project(&k, &t_rl.transform_point(p))? }))
        .collect::<tricalib::Result<_>>()?;
    let (kept, cloud, stats) = triangulate_matches(&matches, &rig, &StereoParams::default());
    println!("{} of {} kept, {stats:?}", kept.len(), matches.len());
    for p in cloud.points() {
        println!("  {:.4?}", p.as_slice());
    }
    Ok(())
}
