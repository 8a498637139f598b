use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::warn;

use tricalib::cli::{
    cmd_calibrate_laser, cmd_calibrate_thermal, cmd_evaluate, cmd_overlay, cmd_synth, identity_euler, parse_euler,
    Config, OverlayMode, OverlayRequest, SynthSource, EVAL_REPORT, LASER_CALIB,
};
use tricalib::dataset::GROUND_TRUTH;
use tricalib::geometry::EulerPose;
use tricalib::Result;

#[derive(Parser)]
#[command(name = "tricalib", version, about = "Targetless stereo / thermal / laser extrinsic calibration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one entry, e.g. `--set reae.inlier_threshold=8`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<Config> {
        let mut config = match &self.config {
            Some(p) => Config::load(p)?,
            None => Config::default(),
        };
        for o in &self.overrides {
            config.set(o)?;
        }
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the laser → stereo extrinsic.
    CalibrateLaser {
        dataset: PathBuf,
        /// Initial T_SL as x,y,z,roll,pitch,yaw (meters, degrees).
        #[arg(long, allow_hyphen_values = true)]
        init: Option<String>,
        /// Output directory, the dataset root by default.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Estimate the thermal → stereo extrinsic from a laser calibration.
    CalibrateThermal {
        dataset: PathBuf,
        /// Initial T_ST as x,y,z,roll,pitch,yaw (meters, degrees).
        #[arg(long, allow_hyphen_values = true)]
        init: Option<String>,
        /// Laser calibration, `<dataset>/laser_calib.json` by default.
        #[arg(long)]
        laser_calib: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Compare a calibration with ground truth.
    Evaluate {
        result: PathBuf,
        /// Ground truth, `ground_truth.json` next to the result by default.
        #[arg(long)]
        ground_truth: Option<PathBuf>,
        /// Report path, `eval_report.json` next to the result by default.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw projected points over one frame's image.
    Overlay {
        dataset: PathBuf,
        #[arg(long)]
        frame: String,
        #[arg(long, value_enum, default_value = "laser-on-rgb")]
        mode: OverlayMode,
        #[arg(long)]
        laser_calib: Option<PathBuf>,
        #[arg(long)]
        thermal_calib: Option<PathBuf>,
        /// Overrides overlay.depth_max.
        #[arg(long)]
        depth_max: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Generate a synthetic dataset.
    Synth {
        out: PathBuf,
        /// Scene spec (JSON, or TOML by extension). Without it a random scene is built.
        #[arg(long, conflicts_with = "seed")]
        spec: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        frames: usize,
    },
}

fn init_pose(arg: &Option<String>) -> Result<EulerPose> {
    match arg {
        Some(s) => parse_euler(s),
        None => {
            warn!("no --init given, starting from identity");
            Ok(identity_euler())
        }
    }
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().unwrap_or(Path::new(".")).join(name)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::CalibrateLaser { dataset, init, out, config } => {
            let record = cmd_calibrate_laser(&dataset, &init_pose(&init)?, &config.load()?, out.as_deref().unwrap_or(&dataset))?;
            println!("{}", serde_json::to_string(&record.pose).expect("serializable"));
        }
        Command::CalibrateThermal {
            dataset,
            init,
            laser_calib,
            out,
            config,
        } => {
            let laser = laser_calib.unwrap_or_else(|| dataset.join(LASER_CALIB));
            let record = cmd_calibrate_thermal(
                &dataset,
                &init_pose(&init)?,
                &laser,
                &config.load()?,
                out.as_deref().unwrap_or(&dataset),
            )?;
            println!("{}", serde_json::to_string(&record.pose).expect("serializable"));
        }
        Command::Evaluate { result, ground_truth, out } => {
            let gt = ground_truth.unwrap_or_else(|| sibling(&result, GROUND_TRUTH));
            let out = out.unwrap_or_else(|| sibling(&result, EVAL_REPORT));
            let report = cmd_evaluate(&result, &gt, Some(&out))?;
            println!(
                "rotation {:.4} deg, translation {:.3} cm",
                report.error.rotation_deg, report.error.translation_cm
            );
        }
        Command::Overlay {
            dataset,
            frame,
            mode,
            laser_calib,
            thermal_calib,
            depth_max,
            out,
            config,
        } => {
            let mut config = config.load()?;
            if let Some(d) = depth_max {
                config.overlay.depth_max = d;
                config.validate()?;
            }
            let laser = laser_calib.unwrap_or_else(|| dataset.join(LASER_CALIB));
            let thermal = thermal_calib.unwrap_or_else(|| dataset.join(tricalib::cli::THERMAL_CALIB));
            let req = OverlayRequest {
                dataset: &dataset,
                laser_calib: &laser,
                thermal_calib: Some(&thermal),
                frame: &frame,
                mode,
                out: &out,
            };
            let stats = cmd_overlay(&req, &config)?;
            println!("{}", serde_json::to_string(&stats).expect("serializable"));
        }
        Command::Synth { out, spec, seed, frames } => {
            let source = match spec {
                Some(p) => SynthSource::File(p),
                None => SynthSource::Random { seed, frames },
            };
            let manifest = cmd_synth(&source, &out)?;
            println!("wrote {} frames to {}", manifest.frames.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
