use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::raycast::{cast, visible, BoxSpec};
use super::{LaserSpec, SceneSpec};
use crate::error::{Error, Result};
use crate::geometry::{project, EulerPose, PinholeIntrinsics, Pose, Vec2, Vec3};
use crate::image::{EdgeMap, GrayImage};
use crate::laser_edges::LaserEdgeParams;
use crate::pointcloud::OrganizedScan;
use crate::pipeline::FrameData;
use crate::stereo::{PixelMatch, StereoRig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub t_sl: EulerPose,
    pub t_st: EulerPose,
    pub t_lr: EulerPose,
}

impl GroundTruth {
    pub fn t_sl(&self) -> Pose {
        self.t_sl.to_pose().expect("ground truth poses are valid")
    }

    pub fn t_st(&self) -> Pose {
        self.t_st.to_pose().expect("ground truth poses are valid")
    }

    pub fn t_lr(&self) -> Pose {
        self.t_lr.to_pose().expect("ground truth poses are valid")
    }
}

#[derive(Clone, Debug)]
pub struct SynthFrame {
    /// World pose of the left camera.
    pub rig_pose: Pose,
    pub scan: OrganizedScan,
    /// Object hit by every laser cell, row-major by ring.
    pub scan_objects: Vec<Option<usize>>,
    /// Noise-free range of every laser cell.
    pub scan_ranges: Vec<Option<f64>>,
    pub matches: Vec<PixelMatch>,
    /// Noise-free source point of every match, stereo frame.
    pub match_points: Vec<Vec3>,
    /// Whether the match was sampled on a box outline seen by both cameras.
    pub match_is_edge: Vec<bool>,
    /// Visible box outlines rasterized in the thermal image.
    pub thermal_edges: EdgeMap,
    pub left: Option<GrayImage>,
    pub right: Option<GrayImage>,
    pub thermal: Option<GrayImage>,
}

#[derive(Clone, Debug)]
pub struct SynthDataset {
    pub spec: SceneSpec,
    pub truth: GroundTruth,
    pub frames: Vec<SynthFrame>,
}

/// Zero-padded frame identifier used on disk.
pub fn frame_id(index: usize) -> String {
    format!("{index:04}")
}

impl SynthDataset {
    pub fn stereo_rig(&self) -> StereoRig {
        StereoRig {
            left: self.spec.rig.left,
            right: self.spec.rig.right,
            t_lr: self.truth.t_lr(),
        }
    }

    /// Frames as the calibration pipeline sees them. `rasterized_thermal`
    /// hands over the outline rasterization instead of leaving the thermal
    /// image to Canny.
    pub fn frame_data(&self, rasterized_thermal: bool) -> Result<Vec<FrameData>> {
        self.frames
            .iter()
            .enumerate()
            .map(|(i, f)| {
                let (Some(left), Some(right)) = (&f.left, &f.right) else {
                    return Err(Error::InvalidArgument("dataset was generated without rendered images".into()));
                };
                Ok(FrameData {
                    id: frame_id(i),
                    left: left.clone(),
                    right: right.clone(),
                    thermal: f.thermal.clone(),
                    thermal_edges: rasterized_thermal.then(|| f.thermal_edges.clone()),
                    scan: f.scan.clone(),
                    matches: f.matches.clone(),
                })
            })
            .collect()
    }
}

/// Gray levels of the flat-shaded renderings; neighbours differ by ≥ 30.
fn visible_level(object: Option<usize>, backdrop: usize) -> f64 {
    match object {
        None => 10.0,
        Some(i) if i < backdrop => 80.0,
        Some(i) => [170.0, 230.0, 130.0, 200.0][(i - backdrop) % 4],
    }
}

fn thermal_level(object: Option<usize>, backdrop: usize) -> f64 {
    match object {
        None => 0.0,
        Some(i) if i < backdrop => 60.0,
        Some(i) => [200.0, 150.0, 250.0, 110.0][(i - backdrop) % 4],
    }
}

struct Camera {
    k: PinholeIntrinsics,
    /// Camera → world.
    pose: Pose,
    world_to_cam: Pose,
}

impl Camera {
    fn new(k: PinholeIntrinsics, pose: Pose) -> Self {
        Self {
            k,
            world_to_cam: pose.inverse(),
            pose,
        }
    }

    fn centre(&self) -> Vec3 {
        *self.pose.translation()
    }

    fn ray(&self, px: &Vec2) -> Vec3 {
        self.pose.rotation() * self.k.backproject(px)
    }

    fn project_world(&self, p: &Vec3) -> Option<Vec2> {
        project(&self.k, &self.world_to_cam.transform_point(p)).ok()
    }

    fn inside(&self, u: &Vec2, border: f64) -> bool {
        u.x >= border && u.y >= border && u.x <= self.k.width as f64 - 1.0 - border && u.y <= self.k.height as f64 - 1.0 - border
    }
}

fn render(boxes: &[BoxSpec], cam: &Camera, ss: usize, level: impl Fn(Option<usize>) -> f64 + Sync) -> GrayImage {
    let (w, h) = (cam.k.width as usize, cam.k.height as usize);
    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|y| {
            (0..w)
                .map(|x| {
                    let mut acc = 0.0;
                    for sy in 0..ss {
                        for sx in 0..ss {
                            let px = Vec2::new(
                                x as f64 - 0.5 + (sx as f64 + 0.5) / ss as f64,
                                y as f64 - 0.5 + (sy as f64 + 0.5) / ss as f64,
                            );
                            acc += level(cast(boxes, &cam.centre(), &cam.ray(&px)).map(|hit| hit.object));
                        }
                    }
                    acc / (ss * ss) as f64
                })
                .collect()
        })
        .collect();
    GrayImage::from_vec(w, h, rows.concat()).expect("rendered dimensions")
}

/// Visible outline segments of every box, densely sampled and rounded to pixels.
fn rasterize_outlines(boxes: &[BoxSpec], cam: &Camera) -> EdgeMap {
    let mut edges = EdgeMap::new(cam.k.width as usize, cam.k.height as usize);
    for (id, b) in boxes.iter().enumerate() {
        for (a, c) in b.contour_edges(&cam.centre()) {
            for p in sample_segment(cam, &a, &c, 0.25) {
                let Some(u) = cam.project_world(&p) else { continue };
                if !cam.inside(&u, 0.0) || !visible(boxes, &cam.centre(), &p, id) {
                    continue;
                }
                let (x, y) = (u.x.round() as usize, u.y.round() as usize);
                if x < edges.width() && y < edges.height() {
                    edges.set(x, y, true);
                }
            }
        }
    }
    edges
}

/// Points along a 3-D segment spaced at most `step_px` apart in the image.
fn sample_segment(cam: &Camera, a: &Vec3, b: &Vec3, step_px: f64) -> Vec<Vec3> {
    // clip to the part in front of the camera so projected lengths are finite
    let za = cam.world_to_cam.transform_point(a).z;
    let zb = cam.world_to_cam.transform_point(b).z;
    let near = 0.05;
    if za < near && zb < near {
        return Vec::new();
    }
    let (mut a, mut b) = (*a, *b);
    if za < near {
        a += (b - a) * ((near - za) / (zb - za));
    } else if zb < near {
        b = a + (b - a) * ((near - za) / (zb - za));
    }
    let (Some(ua), Some(ub)) = (cam.project_world(&a), cam.project_world(&b)) else {
        return Vec::new();
    };
    // projection is not affine, so bound the spacing with a generous count
    let n = (((ua - ub).norm() / step_px).ceil() as usize * 2).clamp(2, 200_000);
    (0..=n).map(|i| a + (b - a) * (i as f64 / n as f64)).collect()
}

fn scan_frame(
    boxes: &[BoxSpec],
    laser: &LaserSpec,
    t_wl: &Pose,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(OrganizedScan, Vec<Option<usize>>, Vec<Option<f64>>)> {
    let mut scan = OrganizedScan::new(laser.rings, laser.columns)?;
    let mut objects = vec![None; laser.rings * laser.columns];
    let mut ranges = vec![None; laser.rings * laser.columns];
    let noise = Normal::new(0.0, sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    let hits: Vec<Option<(usize, f64)>> = (0..laser.rings * laser.columns)
        .into_par_iter()
        .map(|i| {
            let d = laser.direction(i / laser.columns, i % laser.columns);
            cast(boxes, t_wl.translation(), &(t_wl.rotation() * d))
                .filter(|h| h.t <= laser.max_range)
                .map(|h| (h.object, h.t))
        })
        .collect();
    for (i, hit) in hits.into_iter().enumerate() {
        let Some((object, r)) = hit else { continue };
        let (ring, col) = (i / laser.columns, i % laser.columns);
        let measured = if sigma > 0.0 { r + noise.sample(rng) } else { r };
        if measured <= 0.0 {
            continue;
        }
        scan.set(ring, col, Some(laser.direction(ring, col) * measured))?;
        objects[i] = Some(object);
        ranges[i] = Some(r);
    }
    Ok((scan, objects, ranges))
}

struct StereoSamples {
    matches: Vec<PixelMatch>,
    points: Vec<Vec3>,
    is_edge: Vec<bool>,
}

fn sample_stereo(spec: &SceneSpec, left: &Camera, right: &Camera, rng: &mut ChaCha8Rng) -> StereoSamples {
    let boxes = &spec.boxes;
    let border = spec.sampling.border_px;
    let noise = Normal::new(0.0, spec.noise.stereo_sigma.max(f64::MIN_POSITIVE)).expect("finite sigma");
    let mut out = StereoSamples {
        matches: Vec::new(),
        points: Vec::new(),
        is_edge: Vec::new(),
    };
    let push = |p_world: Vec3, edge: bool, rng: &mut ChaCha8Rng, out: &mut StereoSamples| {
        let p = left.world_to_cam.transform_point(&p_world);
        let noisy = if spec.noise.stereo_sigma > 0.0 {
            p + Vec3::new(noise.sample(rng), noise.sample(rng), noise.sample(rng))
        } else {
            p
        };
        let q = right.world_to_cam.transform_point(&left.pose.transform_point(&noisy));
        let (Ok(ul), Ok(ur)) = (project(&left.k, &noisy), project(&right.k, &q)) else {
            return;
        };
        if !left.inside(&ul, border) || !right.inside(&ur, border) {
            return;
        }
        out.matches.push(PixelMatch { left: ul, right: ur });
        out.points.push(p);
        out.is_edge.push(edge);
    };

    for (id, b) in boxes.iter().enumerate() {
        let from_right = b.contour_edges(&right.centre());
        for (a, c) in b.contour_edges(&left.centre()) {
            if !from_right.contains(&(a, c)) {
                continue;
            }
            let samples = sample_segment(left, &a, &c, spec.sampling.edge_spacing_px * 0.5);
            // sample_segment oversamples by two; keep a jittered subset
            let stride = 2;
            let offset = rng.random_range(0..stride);
            for p in samples.into_iter().skip(offset).step_by(stride) {
                let (Some(ul), Some(ur)) = (left.project_world(&p), right.project_world(&p)) else { continue };
                if !left.inside(&ul, border) || !right.inside(&ur, border) {
                    continue;
                }
                if visible(boxes, &left.centre(), &p, id) && visible(boxes, &right.centre(), &p, id) {
                    push(p, true, rng, &mut out);
                }
            }
        }
    }

    let (w, h) = (left.k.width as f64, left.k.height as f64);
    let mut attempts = 0;
    let mut interior = 0;
    while interior < spec.sampling.interior_points && attempts < 20 * spec.sampling.interior_points {
        attempts += 1;
        let px = Vec2::new(rng.random_range(border..w - 1.0 - border), rng.random_range(border..h - 1.0 - border));
        let dir = left.ray(&px);
        let Some(hit) = cast(boxes, &left.centre(), &dir) else { continue };
        let p = left.centre() + dir * hit.t;
        if !visible(boxes, &right.centre(), &p, hit.object) || cast(boxes, &right.centre(), &(p - right.centre())).map(|h| h.object) != Some(hit.object) {
            continue;
        }
        let before = out.matches.len();
        push(p, false, rng, &mut out);
        if out.matches.len() > before {
            interior += 1;
        }
    }
    out
}

/// Near-side laser edge cells implied by the hit objects and noise-free
/// ranges: `k` neighbours on the same object and within `epsilon` on one
/// side, and `k` cells of other objects deeper by more than `epsilon` on the
/// other. Faces seen at grazing angles fail the first test.
pub fn predict_laser_edges(frame: &SynthFrame, params: &LaserEdgeParams) -> Vec<bool> {
    let (rings, cols) = (frame.scan.rings(), frame.scan.columns());
    let k = params.k as isize;
    let mut out = vec![false; rings * cols];
    let at = |ring: usize, c: isize| -> Option<(usize, f64)> {
        let c = if params.wrap_around {
            c.rem_euclid(cols as isize)
        } else if c < 0 || c >= cols as isize {
            return None;
        } else {
            c
        } as usize;
        let i = ring * cols + c;
        Some((frame.scan_objects[i]?, frame.scan_ranges[i]?))
    };
    for ring in 0..rings {
        for c in 0..cols {
            let Some((obj, r)) = at(ring, c as isize) else { continue };
            let own = |s: isize| {
                (1..=k).all(|j| at(ring, c as isize + s * j).is_some_and(|(o, rn)| o == obj && (rn - r).abs() <= params.epsilon))
            };
            let far = |s: isize| {
                (1..=k).all(|j| at(ring, c as isize + s * j).is_some_and(|(o, rn)| o != obj && rn - r > params.epsilon))
            };
            out[ring * cols + c] = (own(-1) && far(1)) || (far(-1) && own(1));
        }
    }
    out
}

impl SynthFrame {
    /// Exact outline crossings of the predicted edge cells: for each one, the
    /// point on its object where the ring leaves it toward the deeper side,
    /// laser frame.
    pub fn silhouette_points(&self, spec: &SceneSpec, t_sl: &Pose, params: &LaserEdgeParams) -> Vec<Vec3> {
        let laser = &spec.rig.laser;
        let t_wl = self.rig_pose * *t_sl;
        let cols = laser.columns;
        let edges = predict_laser_edges(self, params);
        let mut out = Vec::new();
        for (i, _) in edges.iter().enumerate().filter(|(_, &e)| e) {
            let (ring, c) = (i / cols, i % cols);
            let obj = self.scan_objects[i].expect("edge cells are valid");
            let elev = laser.elevation(ring);
            let step = if (c + 1) < cols && self.scan_objects[ring * cols + c + 1] != Some(obj) || c + 1 == cols {
                1.0
            } else {
                -1.0
            };
            let hits_obj = |az: f64| {
                let d = laser.direction_at(elev, az);
                cast(&spec.boxes, t_wl.translation(), &(t_wl.rotation() * d)).map(|h| (h.object, h.t))
            };
            let (mut inside, mut outside) = (laser.azimuth(c as f64), laser.azimuth(c as f64 + step));
            for _ in 0..60 {
                let mid = 0.5 * (inside + outside);
                if hits_obj(mid).is_some_and(|(o, _)| o == obj) {
                    inside = mid;
                } else {
                    outside = mid;
                }
            }
            if let Some((_, t)) = hits_obj(inside) {
                out.push(laser.direction_at(elev, inside) * t);
            }
        }
        out
    }
}

fn generate_frame(spec: &SceneSpec, index: usize, truth: &GroundTruth) -> Result<SynthFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    rng.set_stream(index as u64 + 1);
    let rig = spec.rig_pose(index)?;
    let left = Camera::new(spec.rig.left, rig);
    let right = Camera::new(spec.rig.right, rig * truth.t_lr());
    let thermal = Camera::new(spec.rig.thermal, rig * truth.t_st());
    let t_wl = rig * truth.t_sl();

    let (scan, scan_objects, scan_ranges) =
        scan_frame(&spec.boxes, &spec.rig.laser, &t_wl, spec.noise.laser_range_sigma, &mut rng)?;
    if scan.valid_count() == 0 {
        return Err(Error::EmptyView { sensor: "laser".into() });
    }
    let stereo = sample_stereo(spec, &left, &right, &mut rng);
    if stereo.matches.is_empty() {
        return Err(Error::EmptyView { sensor: "stereo".into() });
    }
    let thermal_edges = rasterize_outlines(&spec.boxes, &thermal);
    if thermal_edges.is_empty() {
        return Err(Error::EmptyView { sensor: "thermal".into() });
    }
    let ss = spec.sampling.render_supersampling;
    let (l_img, r_img, t_img) = if ss > 0 {
        (
            Some(render(&spec.boxes, &left, ss, |o| visible_level(o, spec.backdrop))),
            Some(render(&spec.boxes, &right, ss, |o| visible_level(o, spec.backdrop))),
            Some(render(&spec.boxes, &thermal, ss, |o| thermal_level(o, spec.backdrop))),
        )
    } else {
        (None, None, None)
    };
    Ok(SynthFrame {
        rig_pose: rig,
        scan,
        scan_objects,
        scan_ranges,
        matches: stereo.matches,
        match_points: stereo.points,
        match_is_edge: stereo.is_edge,
        thermal_edges,
        left: l_img,
        right: r_img,
        thermal: t_img,
    })
}

/// Renders every frame of a scene. Frames use independent RNG streams of the
/// scene seed, so output does not depend on scheduling.
pub fn generate(spec: &SceneSpec) -> Result<SynthDataset> {
    spec.validate()?;
    let truth = GroundTruth {
        t_sl: spec.rig.t_sl,
        t_st: spec.rig.t_st,
        t_lr: spec.rig.t_lr,
    };
    let frames = (0..spec.frames.len())
        .into_par_iter()
        .map(|i| generate_frame(spec, i, &truth))
        .collect::<Result<Vec<_>>>()?;
    Ok(SynthDataset {
        spec: spec.clone(),
        truth,
        frames,
    })
}
