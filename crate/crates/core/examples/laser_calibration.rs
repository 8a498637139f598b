//! Laser to stereo extrinsic from a perturbed start.

use tricalib::geometry::{rotation_error, translation_error};
use tricalib::laser_edges::LaserEdgeParams;
use tricalib::mficp::{calibrate_laser, IcpParams};
use tricalib::pipeline::{icp_frames, process_frames};
use tricalib::stereo::StereoParams;
use tricalib::synth::{generate, perturb_pose, SceneSpec};

fn main() -> tricalib::Result<()> {
    let ds = generate(&SceneSpec::random(1001, 6).with_noise(0.02, 0.02))?;
    let frames = ds.frame_data(false)?;
    let processed = process_frames(&frames, &ds.stereo_rig(), &StereoParams::default(), &LaserEdgeParams::default())?;
    let truth = ds.truth.t_sl();
    let init = perturb_pose(&truth, (8.0, 12.0), (0.16, 0.24), 3);

    let result = calibrate_laser(&icp_frames(&processed)?, &init, &IcpParams::default())?;
    println!("{:?} after {} iterations", result.stop, result.outer_iterations());
    for (name, pose) in [("init", &init), ("result", &result.pose)] {
        println!(
            "{name}: {:.3} deg, {:.2} cm",
            rotation_error(pose, &truth).to_degrees(),
            100.0 * translation_error(pose, &truth)
        );
    }
    Ok(())
}
