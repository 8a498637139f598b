//! The command-line flow through the library: synth, both calibrations,
//! evaluation and an overlay image.

use std::path::Path;

use tricalib::cli::{
    cmd_calibrate_laser, cmd_calibrate_thermal, cmd_evaluate, cmd_overlay, cmd_synth, Config, OverlayMode,
    OverlayRequest, SynthSource, LASER_CALIB,
};
use tricalib::dataset::GROUND_TRUTH;
use tricalib::geometry::EulerPose;
use tricalib::synth::perturb_pose;

fn main() -> tricalib::Result<()> {
    let root = std::env::args().nth(1).unwrap_or_else(|| "cli_workflow".into());
    let root = Path::new(&root);
    cmd_synth(&SynthSource::Random { seed: 1003, frames: 6 }, root)?;
    let truth = tricalib::dataset::load_ground_truth(&root.join(GROUND_TRUTH))?;
    let config: Config = Config::default();

    let init = EulerPose::from_pose(&perturb_pose(&truth.t_sl(), (5.0, 5.0), (0.1, 0.1), 0));
    cmd_calibrate_laser(root, &init, &config, root)?;
    let init = EulerPose::from_pose(&perturb_pose(&truth.t_st(), (4.0, 4.0), (0.08, 0.08), 0));
    let thermal = cmd_calibrate_thermal(root, &init, &root.join(LASER_CALIB), &config, root)?;
    println!("thermal result {:?}", thermal.pose);

    for file in [LASER_CALIB, tricalib::cli::THERMAL_CALIB] {
        let report = cmd_evaluate(&root.join(file), &root.join(GROUND_TRUTH), None)?;
        println!("{file}: {:.3} deg, {:.2} cm", report.error.rotation_deg, report.error.translation_cm);
    }

    let req = OverlayRequest {
        dataset: root,
        laser_calib: &root.join(LASER_CALIB),
        thermal_calib: Some(&root.join(tricalib::cli::THERMAL_CALIB)),
        frame: "0000",
        mode: OverlayMode::EdgesOnThermal,
        out: &root.join("overlay_0000.png"),
    };
    let stats = cmd_overlay(&req, &config)?;
    println!("overlay: {stats:?}");
    Ok(())
}
