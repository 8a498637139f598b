//! On-disk dataset layout: `manifest.json` at the root and one directory per
//! frame under `frames/<id>/`.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{EulerPose, PinholeIntrinsics};
use crate::image::{load_gray, save_gray, EdgeMap};
use crate::pipeline::FrameData;
use crate::pointcloud::{load_scan, save_scan};
use crate::stereo::{load_matches, save_matches, StereoRig};
use crate::synth::{frame_id, GroundTruth, SynthDataset};

pub const MANIFEST: &str = "manifest.json";
pub const GROUND_TRUTH: &str = "ground_truth.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScanShape {
    pub rings: usize,
    pub columns: usize,
}

/// Files of one frame, relative to the dataset root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub id: String,
    pub left: PathBuf,
    pub right: PathBuf,
    pub thermal: PathBuf,
    pub laser: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matches: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thermal_edges: Option<PathBuf>,
}

impl FrameEntry {
    /// The standard file names under `frames/<id>/`.
    pub fn standard(id: &str, matches: bool, thermal_edges: bool) -> Self {
        let dir = Path::new("frames").join(id);
        Self {
            id: id.to_string(),
            left: dir.join("left.png"),
            right: dir.join("right.png"),
            thermal: dir.join("thermal.png"),
            laser: dir.join("laser.csv"),
            matches: matches.then(|| dir.join("matches.csv")),
            thermal_edges: thermal_edges.then(|| dir.join("thermal_edges.png")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    #[serde(skip)]
    pub root: PathBuf,
    pub k_left: PinholeIntrinsics,
    pub k_right: PinholeIntrinsics,
    pub k_thermal: PinholeIntrinsics,
    /// Right camera → left camera.
    pub t_lr: EulerPose,
    pub laser: ScanShape,
    pub frames: Vec<FrameEntry>,
}

impl DatasetManifest {
    pub fn load(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut manifest: Self = serde_json::from_str(&text).map_err(|e| Error::parse(&path, e.line(), e.to_string()))?;
        manifest.root = root.to_path_buf();
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn save(&self) -> Result<()> {
        let path = self.root.join(MANIFEST);
        write_json(&path, self)
    }

    pub fn validate(&self) -> Result<()> {
        for k in [&self.k_left, &self.k_right, &self.k_thermal] {
            k.validate()?;
        }
        self.t_lr.to_pose()?;
        if self.frames.is_empty() {
            return Err(Error::Validation("manifest lists no frames".into()));
        }
        let width = self.frames[0].id.len();
        let mut seen = HashSet::new();
        for f in &self.frames {
            if f.id.is_empty() || !f.id.bytes().all(|b| b.is_ascii_digit()) || f.id.len() != width {
                return Err(Error::Validation(format!(
                    "frame id {:?} is not a zero-padded number of width {width}",
                    f.id
                )));
            }
            if !seen.insert(&f.id) {
                return Err(Error::Validation(format!("duplicate frame id {:?}", f.id)));
            }
            let required = [&f.left, &f.right, &f.thermal, &f.laser];
            for p in required.into_iter().chain(&f.matches).chain(&f.thermal_edges) {
                let full = self.root.join(p);
                if !full.is_file() {
                    return Err(Error::Validation(format!("frame {}: missing file {}", f.id, full.display())));
                }
            }
        }
        Ok(())
    }

    pub fn stereo_rig(&self) -> Result<StereoRig> {
        Ok(StereoRig {
            left: self.k_left,
            right: self.k_right,
            t_lr: self.t_lr.to_pose()?,
        })
    }

    pub fn frame_ids(&self) -> Vec<String> {
        self.frames.iter().map(|f| f.id.clone()).collect()
    }

    pub fn entry(&self, id: &str) -> Result<&FrameEntry> {
        self.frames.iter().find(|f| f.id == id).ok_or_else(|| Error::UnknownFrame {
            id: id.to_string(),
            valid: self.frame_ids(),
        })
    }

    /// Reads one frame. Correspondences are required: they are not computed here.
    pub fn load_frame(&self, entry: &FrameEntry) -> Result<FrameData> {
        let matches = entry.matches.as_ref().ok_or_else(|| {
            Error::Validation(format!(
                "frame {}: no matches.csv; precompute stereo correspondences (ul,vl,ur,vr) into frames/{}/matches.csv",
                entry.id, entry.id
            ))
        })?;
        let left = load_gray(&self.root.join(&entry.left))?;
        let right = load_gray(&self.root.join(&entry.right))?;
        let thermal = load_gray(&self.root.join(&entry.thermal))?;
        for (name, img, k) in [("left", &left, &self.k_left), ("right", &right, &self.k_right), ("thermal", &thermal, &self.k_thermal)] {
            if img.width() != k.width as usize || img.height() != k.height as usize {
                return Err(Error::Validation(format!(
                    "frame {}: {name} image is {}x{}, intrinsics say {}x{}",
                    entry.id,
                    img.width(),
                    img.height(),
                    k.width,
                    k.height
                )));
            }
        }
        let thermal_edges = match &entry.thermal_edges {
            Some(p) => Some(EdgeMap::from_image(&load_gray(&self.root.join(p))?)),
            None => None,
        };
        Ok(FrameData {
            id: entry.id.clone(),
            left,
            right,
            thermal: Some(thermal),
            thermal_edges,
            scan: load_scan(&self.root.join(&entry.laser), self.laser.rings, self.laser.columns)?,
            matches: load_matches(&self.root.join(matches))?,
        })
    }

    pub fn load_frames(&self) -> Result<Vec<FrameData>> {
        self.frames.iter().map(|e| self.load_frame(e)).collect()
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Validation(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

pub fn load_ground_truth(path: &Path) -> Result<GroundTruth> {
    read_json(path)
}

/// Writes a generated dataset in the standard layout, ground truth included.
pub fn write_synth_dataset(ds: &SynthDataset, root: &Path) -> Result<DatasetManifest> {
    let mkdir = |p: &Path| fs::create_dir_all(p).map_err(|e| Error::io(p, e));
    mkdir(root)?;
    let mut frames = Vec::with_capacity(ds.frames.len());
    for (i, f) in ds.frames.iter().enumerate() {
        let (Some(left), Some(right), Some(thermal)) = (&f.left, &f.right, &f.thermal) else {
            return Err(Error::InvalidArgument(
                "the dataset layout needs images; set sampling.render_supersampling > 0".into(),
            ));
        };
        let entry = FrameEntry::standard(&frame_id(i), true, true);
        mkdir(&root.join("frames").join(&entry.id))?;
        save_gray(&root.join(&entry.left), left)?;
        save_gray(&root.join(&entry.right), right)?;
        save_gray(&root.join(&entry.thermal), thermal)?;
        save_gray(
            &root.join(entry.thermal_edges.as_ref().expect("standard entry")),
            &f.thermal_edges.to_image(),
        )?;
        save_scan(&root.join(&entry.laser), &f.scan)?;
        save_matches(&root.join(entry.matches.as_ref().expect("standard entry")), &f.matches)?;
        frames.push(entry);
    }
    let manifest = DatasetManifest {
        root: root.to_path_buf(),
        k_left: ds.spec.rig.left,
        k_right: ds.spec.rig.right,
        k_thermal: ds.spec.rig.thermal,
        t_lr: ds.truth.t_lr,
        laser: ScanShape {
            rings: ds.spec.rig.laser.rings,
            columns: ds.spec.rig.laser.columns,
        },
        frames,
    };
    manifest.save()?;
    write_json(&root.join(GROUND_TRUTH), &ds.truth)?;
    Ok(manifest)
}
