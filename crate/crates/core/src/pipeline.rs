//! Per-frame preprocessing shared by every calibration entry point: stereo
//! triangulation and edge tagging, laser edge flags and thermal edge fields.

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PinholeIntrinsics, Pose};
use crate::image::{EdgeMap, GrayImage};
use crate::laser_edges::{detect_laser_edges, FlaggedScan, LaserEdgeParams};
use crate::mficp::IcpFrame;
use crate::pointcloud::{OrganizedScan, PointCloud};
use crate::reae::EdgeProjectionSet;
use crate::stereo::{
    sobel_edges, tag_stereo_edge_points, triangulate_matches, PixelMatch, StereoParams, StereoRig, TriangulationStats,
};
use crate::thermal::{build_attraction_field, extract_thermal_edges, CannyParams};

/// Raw sensor data of one synchronized frame.
#[derive(Clone, Debug)]
pub struct FrameData {
    pub id: String,
    pub left: GrayImage,
    pub right: GrayImage,
    pub thermal: Option<GrayImage>,
    /// Edge map supplied with the frame instead of running Canny.
    pub thermal_edges: Option<EdgeMap>,
    pub scan: OrganizedScan,
    pub matches: Vec<PixelMatch>,
}

/// Where thermal edges come from.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalEdgeSource {
    /// A supplied edge map when present, otherwise Canny on the thermal image.
    #[default]
    Auto,
    Canny,
    Supplied,
}

/// Stereo cloud with edge flags and the flagged laser scan of one frame.
#[derive(Clone, Debug)]
pub struct ProcessedFrame {
    pub id: String,
    pub stereo: PointCloud,
    pub laser: FlaggedScan,
    pub triangulation: TriangulationStats,
}

pub fn process_frame(
    frame: &FrameData,
    rig: &StereoRig,
    stereo: &StereoParams,
    laser: &LaserEdgeParams,
) -> Result<ProcessedFrame> {
    let (kept, cloud, triangulation) = triangulate_matches(&frame.matches, rig, stereo);
    if cloud.is_empty() {
        return Err(Error::Validation(format!("frame {}: no correspondence triangulated", frame.id)));
    }
    let left_edges = sobel_edges(&frame.left, stereo.sobel_threshold);
    let right_edges = sobel_edges(&frame.right, stereo.sobel_threshold);
    let stereo_cloud = tag_stereo_edge_points(&kept, &left_edges, &right_edges, &cloud)?;
    let flagged = detect_laser_edges(&frame.scan, laser)?;
    debug!(
        "frame {}: {} stereo points ({} edges), {} laser points ({} edges)",
        frame.id,
        stereo_cloud.len(),
        stereo_cloud.edge_count(),
        flagged.cloud.len(),
        flagged.cloud.edge_count()
    );
    Ok(ProcessedFrame {
        id: frame.id.clone(),
        stereo: stereo_cloud,
        laser: flagged,
        triangulation,
    })
}

pub fn process_frames(
    frames: &[FrameData],
    rig: &StereoRig,
    stereo: &StereoParams,
    laser: &LaserEdgeParams,
) -> Result<Vec<ProcessedFrame>> {
    frames.par_iter().map(|f| process_frame(f, rig, stereo, laser)).collect()
}

/// Registration inputs: every stereo point against every valid laser return.
pub fn icp_frames(frames: &[ProcessedFrame]) -> Result<Vec<IcpFrame>> {
    frames.par_iter().map(|f| IcpFrame::new(&f.stereo, &f.laser.cloud)).collect()
}

/// Thermal edges of one frame, or `None` when the frame offers none.
pub fn thermal_edge_map(frame: &FrameData, source: ThermalEdgeSource, canny: &CannyParams) -> Result<Option<EdgeMap>> {
    let edges = match (source, &frame.thermal_edges, &frame.thermal) {
        (ThermalEdgeSource::Auto | ThermalEdgeSource::Supplied, Some(e), _) => Some(e.clone()),
        (ThermalEdgeSource::Supplied, None, _) => None,
        (_, _, Some(img)) => Some(extract_thermal_edges(img, canny)?.0),
        (_, _, None) => None,
    };
    Ok(edges.filter(|e| !e.is_empty()))
}

/// Builds the per-frame edge sets for the thermal stage, with the ids of the
/// frames they come from. Frames without thermal edges are skipped; it is an
/// error when none remain.
pub fn edge_projection_sets(
    frames: &[FrameData],
    processed: &[ProcessedFrame],
    t_sl: &Pose,
    thermal: &PinholeIntrinsics,
    source: ThermalEdgeSource,
    canny: &CannyParams,
) -> Result<(Vec<String>, Vec<EdgeProjectionSet>)> {
    if frames.len() != processed.len() {
        return Err(Error::Validation(format!(
            "{} frames but {} processed frames",
            frames.len(),
            processed.len()
        )));
    }
    let sets: Vec<Option<(String, EdgeProjectionSet)>> = frames
        .par_iter()
        .zip(processed.par_iter())
        .map(|(f, p)| -> Result<Option<(String, EdgeProjectionSet)>> {
            let Some(edges) = thermal_edge_map(f, source, canny)? else {
                warn!("frame {}: no thermal edges, skipped", f.id);
                return Ok(None);
            };
            if edges.width() != thermal.width as usize || edges.height() != thermal.height as usize {
                return Err(Error::Validation(format!(
                    "frame {}: thermal edges are {}x{}, camera is {}x{}",
                    f.id,
                    edges.width(),
                    edges.height(),
                    thermal.width,
                    thermal.height
                )));
            }
            let field = build_attraction_field(&edges)?;
            let set = EdgeProjectionSet::new(p.stereo.edge_points(), &p.laser.cloud.edge_points(), t_sl, field, *thermal)?;
            Ok(Some((f.id.clone(), set)))
        })
        .collect::<Result<_>>()?;
    let (ids, sets): (Vec<String>, Vec<EdgeProjectionSet>) = sets.into_iter().flatten().unzip();
    if sets.is_empty() {
        return Err(Error::DegenerateProblem("no frame has thermal edges".into()));
    }
    Ok((ids, sets))
}
