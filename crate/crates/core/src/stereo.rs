//! Stereo point clouds from matched pixels and Sobel-based edge tagging.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{PinholeIntrinsics, Pose, Vec2, Vec3};
use crate::image::{EdgeMap, GrayImage};
use crate::pointcloud::PointCloud;

/// One matched feature: subpixel positions in the left and right images.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelMatch {
    pub left: Vec2,
    pub right: Vec2,
}

/// Left/right intrinsics plus the right → left transform.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StereoRig {
    pub left: PinholeIntrinsics,
    pub right: PinholeIntrinsics,
    pub t_lr: Pose,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StereoParams {
    /// Sobel magnitude threshold on the 8-bit scale.
    pub sobel_threshold: f64,
    /// Rays closer to parallel than this (radians) are dropped.
    pub min_triangulation_angle: f64,
    /// Points deeper than this (meters) are dropped.
    pub max_depth: f64,
}

impl Default for StereoParams {
    fn default() -> Self {
        Self {
            sobel_threshold: 100.0,
            min_triangulation_angle: 1e-4,
            max_depth: 80.0,
        }
    }
}

/// Midpoint of the common perpendicular of the two back-projected rays, in
/// the left camera frame.
pub fn triangulate(
    left_px: &Vec2,
    right_px: &Vec2,
    k_left: &PinholeIntrinsics,
    k_right: &PinholeIntrinsics,
    t_lr: &Pose,
) -> Result<Vec3> {
    triangulate_with_angle(left_px, right_px, k_left, k_right, t_lr, 1e-4)
}

fn triangulate_with_angle(
    left_px: &Vec2,
    right_px: &Vec2,
    k_left: &PinholeIntrinsics,
    k_right: &PinholeIntrinsics,
    t_lr: &Pose,
    min_angle: f64,
) -> Result<Vec3> {
    let d1 = k_left.backproject(left_px).normalize();
    let d2 = (t_lr.rotation() * k_right.backproject(right_px)).normalize();
    let o2 = *t_lr.translation();
    let angle = d1.cross(&d2).norm().atan2(d1.dot(&d2));
    if angle < min_angle {
        return Err(Error::DegenerateGeometry(format!(
            "rays are nearly parallel ({angle:.2e} rad)"
        )));
    }
    // minimize |s·d1 − (o2 + t·d2)|²
    let w0 = -o2;
    let b = d1.dot(&d2);
    let (dw, ew) = (d1.dot(&w0), d2.dot(&w0));
    let denom = 1.0 - b * b;
    let s = (b * ew - dw) / denom;
    let t = (ew - b * dw) / denom;
    if s <= 0.0 {
        return Err(Error::Cheirality { camera: "left" });
    }
    if t <= 0.0 {
        return Err(Error::Cheirality { camera: "right" });
    }
    Ok(0.5 * (d1 * s + o2 + d2 * t))
}

/// Counts of correspondences discarded during triangulation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TriangulationStats {
    pub kept: usize,
    pub low_parallax: usize,
    pub too_deep: usize,
    pub cheirality: usize,
}

/// Triangulates every match; returns the kept matches alongside the cloud so
/// that the two stay index-aligned.
pub fn triangulate_matches(
    matches: &[PixelMatch],
    rig: &StereoRig,
    params: &StereoParams,
) -> (Vec<PixelMatch>, PointCloud, TriangulationStats) {
    let mut kept = Vec::new();
    let mut points = Vec::new();
    let mut stats = TriangulationStats::default();
    for m in matches {
        match triangulate_with_angle(&m.left, &m.right, &rig.left, &rig.right, &rig.t_lr, params.min_triangulation_angle) {
            Ok(p) if p.z > params.max_depth => stats.too_deep += 1,
            Ok(p) => {
                kept.push(*m);
                points.push(p);
            }
            Err(Error::Cheirality { .. }) => stats.cheirality += 1,
            Err(_) => stats.low_parallax += 1,
        }
    }
    stats.kept = points.len();
    let cloud = PointCloud::new(points).expect("triangulated points are finite");
    (kept, cloud, stats)
}

/// Sobel gradient magnitude; the one-pixel border is zero.
pub fn sobel_magnitude(image: &GrayImage) -> GrayImage {
    let (w, h) = (image.width(), image.height());
    let mut out = GrayImage::new(w, h, 0.0);
    if w < 3 || h < 3 {
        return out;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let p = |dx: isize, dy: isize| image.get((x as isize + dx) as usize, (y as isize + dy) as usize);
            let gx = (p(1, -1) + 2.0 * p(1, 0) + p(1, 1)) - (p(-1, -1) + 2.0 * p(-1, 0) + p(-1, 1));
            let gy = (p(-1, 1) + 2.0 * p(0, 1) + p(1, 1)) - (p(-1, -1) + 2.0 * p(0, -1) + p(1, -1));
            out.set(x, y, (gx * gx + gy * gy).sqrt());
        }
    }
    out
}

/// Pixels whose Sobel magnitude reaches `threshold`.
pub fn sobel_edges(image: &GrayImage, magnitude_threshold: f64) -> EdgeMap {
    let mag = sobel_magnitude(image);
    let (w, h) = (image.width(), image.height());
    let mut edges = EdgeMap::new(w, h);
    if w < 3 || h < 3 {
        return edges;
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            if mag.get(x, y) >= magnitude_threshold {
                edges.set(x, y, true);
            }
        }
    }
    edges
}

/// Flags points whose features sit within one pixel of an edge in both views.
pub fn tag_stereo_edge_points(
    matches: &[PixelMatch],
    left_edges: &EdgeMap,
    right_edges: &EdgeMap,
    cloud: &PointCloud,
) -> Result<PointCloud> {
    if matches.len() != cloud.len() {
        return Err(Error::Validation(format!(
            "{} correspondences for {} stereo points",
            matches.len(),
            cloud.len()
        )));
    }
    let on_edge = |map: &EdgeMap, px: &Vec2| map.near_edge(px.x.round() as i64, px.y.round() as i64, 1);
    let flags = matches
        .iter()
        .map(|m| on_edge(left_edges, &m.left) && on_edge(right_edges, &m.right))
        .collect();
    PointCloud::with_edges(cloud.points().to_vec(), flags)
}

/// Reads a `ul,vl,ur,vr` correspondence file.
pub fn load_matches(path: &Path) -> Result<Vec<PixelMatch>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    match lines.next() {
        Some((_, "ul,vl,ur,vr")) => {}
        Some((n, other)) => return Err(Error::parse(path, n, format!("bad header '{other}'"))),
        None => return Err(Error::parse(path, 1, "empty file")),
    }
    let mut out = Vec::new();
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(path, n, format!("malformed row '{line}'")))?;
        if v.len() != 4 || !v.iter().all(|x| x.is_finite()) {
            return Err(Error::parse(path, n, "expected four finite values"));
        }
        out.push(PixelMatch {
            left: Vec2::new(v[0], v[1]),
            right: Vec2::new(v[2], v[3]),
        });
    }
    Ok(out)
}

pub fn save_matches(path: &Path, matches: &[PixelMatch]) -> Result<()> {
    let mut out = String::from("ul,vl,ur,vr\n");
    for m in matches {
        let _ = writeln!(out, "{},{},{},{}", m.left.x, m.left.y, m.right.x, m.right.y);
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
