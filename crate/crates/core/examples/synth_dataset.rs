//! Generate a random scene and write it as an on-disk dataset.

use tricalib::dataset::write_synth_dataset;
use tricalib::synth::{generate, SceneSpec};

fn main() -> tricalib::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "synth_dataset".into());
    let spec = SceneSpec::random(7, 3).with_noise(0.02, 0.02);
    let ds = generate(&spec)?;
    for f in &ds.frames {
        println!(
            "{} laser returns, {} stereo matches ({} on outlines)",
            f.scan.valid_count(),
            f.matches.len(),
            f.match_is_edge.iter().filter(|e| **e).count()
        );
    }
    let manifest = write_synth_dataset(&ds, std::path::Path::new(&out))?;
    println!("wrote frames {:?} to {out}", manifest.frame_ids());
    println!("truth: {:?}", ds.truth);
    Ok(())
}
