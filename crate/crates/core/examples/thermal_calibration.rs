//! Both stages: laser registration, then the thermal camera against edges.

use tricalib::geometry::{rotation_error, translation_error, Pose};
use tricalib::laser_edges::LaserEdgeParams;
use tricalib::mficp::{calibrate_laser, IcpParams};
use tricalib::pipeline::{edge_projection_sets, icp_frames, process_frames, ThermalEdgeSource};
use tricalib::reae::{calibrate_thermal, ReaeParams};
use tricalib::stereo::StereoParams;
use tricalib::synth::{generate, perturb_pose, SceneSpec};
use tricalib::thermal::CannyParams;

fn report(name: &str, est: &Pose, truth: &Pose) {
    println!(
        "{name}: {:.3} deg, {:.2} cm",
        rotation_error(est, truth).to_degrees(),
        100.0 * translation_error(est, truth)
    );
}

fn main() -> tricalib::Result<()> {
    let spec = SceneSpec::random(1000, 6).with_noise(0.02, 0.02);
    let ds = generate(&spec)?;
    let frames = ds.frame_data(false)?;
    let processed = process_frames(&frames, &ds.stereo_rig(), &StereoParams::default(), &LaserEdgeParams::default())?;

    let laser_init = perturb_pose(&ds.truth.t_sl(), (8.0, 12.0), (0.16, 0.24), 1);
    let t_sl = calibrate_laser(&icp_frames(&processed)?, &laser_init, &IcpParams::default())?.pose;
    report("laser", &t_sl, &ds.truth.t_sl());

    // thermal edges come from Canny on the rendered thermal images
    let (ids, sets) = edge_projection_sets(
        &frames,
        &processed,
        &t_sl,
        &spec.rig.thermal,
        ThermalEdgeSource::Canny,
        &CannyParams::default(),
    )?;
    println!("using frames {ids:?}");
    let init = perturb_pose(&ds.truth.t_st(), (4.0, 6.0), (0.08, 0.12), 2);
    report("thermal init", &init, &ds.truth.t_st());
    let result = calibrate_thermal(&sets, &init, &ReaeParams::default())?;
    report("thermal", &result.pose, &ds.truth.t_st());
    println!("cost per outer iteration: {:?}", result.cost_trace());
    Ok(())
}
