//! Diagnostic projections drawn over camera images.

use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{project, PinholeIntrinsics, Pose, Vec2, Vec3};
use crate::image::{save_rgb, EdgeMap, GrayImage};
use crate::thermal::build_attraction_field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OverlayMode {
    /// Laser points through T_SL onto the left image.
    LaserOnRgb,
    /// Stereo and laser edge points through T_ST onto the thermal image.
    EdgesOnThermal,
}

pub const LASER_COLOR: [u8; 3] = [255, 0, 0];
pub const STEREO_COLOR: [u8; 3] = [0, 255, 0];

/// A point set drawn in one color, in the target camera frame.
pub struct Layer<'a> {
    pub points: &'a [Vec3],
    pub color: [u8; 3],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OverlayStats {
    /// Points projected inside the image.
    pub marks: usize,
    /// Points behind the camera, beyond `depth_max` or outside the image.
    pub dropped: usize,
    /// Fraction of marks within 2 px of a reference edge, when a reference is given.
    pub near_edge_fraction: Option<f64>,
}

/// Pixel positions of the points that pass the depth filter and land in the image.
pub fn project_points(points: &[Vec3], k: &PinholeIntrinsics, depth_max: f64) -> Vec<Vec2> {
    points
        .iter()
        .filter(|p| p.z > 0.0 && p.z < depth_max)
        .filter_map(|p| project(k, p).ok())
        .filter(|u| k.contains(u))
        .collect()
}

pub fn to_camera(points: &[Vec3], t_cam_from_points: &Pose) -> Vec<Vec3> {
    points.iter().map(|p| t_cam_from_points.transform_point(p)).collect()
}

/// Fraction of pixel positions within 2 px (Euclidean) of an edge pixel.
pub fn near_edge_fraction(marks: &[Vec2], edges: &EdgeMap) -> Result<f64> {
    if marks.is_empty() {
        return Ok(0.0);
    }
    let field = build_attraction_field(edges)?;
    let near = marks
        .iter()
        .filter(|u| {
            let x = (u.x.round().max(0.0) as usize).min(field.width() - 1);
            let y = (u.y.round().max(0.0) as usize).min(field.height() - 1);
            field.at(x, y) <= 2.0
        })
        .count();
    Ok(near as f64 / marks.len() as f64)
}

/// Draws every layer over `base` and writes a PNG.
pub fn render_overlay(
    path: &Path,
    base: &GrayImage,
    k: &PinholeIntrinsics,
    layers: &[Layer],
    depth_max: f64,
    radius: usize,
    reference: Option<&EdgeMap>,
) -> Result<OverlayStats> {
    if depth_max <= 0.0 {
        warn!("depth_max = {depth_max} leaves nothing to draw");
    }
    let (w, h) = (base.width(), base.height());
    let mut rgb: Vec<u8> = base
        .data()
        .iter()
        .flat_map(|&v| {
            let g = v.round().clamp(0.0, 255.0) as u8;
            [g, g, g]
        })
        .collect();
    let mut all = Vec::new();
    let mut total = 0;
    for layer in layers {
        total += layer.points.len();
        let marks = project_points(layer.points, k, depth_max);
        let r = radius as i64;
        for u in &marks {
            let (cx, cy) = (u.x.round() as i64, u.y.round() as i64);
            for y in (cy - r).max(0)..=(cy + r).min(h as i64 - 1) {
                for x in (cx - r).max(0)..=(cx + r).min(w as i64 - 1) {
                    let i = 3 * (y as usize * w + x as usize);
                    rgb[i..i + 3].copy_from_slice(&layer.color);
                }
            }
        }
        all.extend(marks);
    }
    let near_edge_fraction = match reference {
        Some(edges) if !edges.is_empty() => Some(near_edge_fraction(&all, edges)?),
        _ => None,
    };
    save_rgb(path, w, h, rgb)?;
    Ok(OverlayStats {
        marks: all.len(),
        dropped: total - all.len(),
        near_edge_fraction,
    })
}
