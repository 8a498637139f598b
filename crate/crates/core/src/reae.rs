//! Stereo→thermal extrinsic from edge alignment.
//!
//! Stereo and laser edge points are projected into the thermal camera and
//! scored by the attraction field: the REAE cost is the sum of field values
//! over inlier points (those landing within `th` pixels of a thermal edge).
//! A coarse grid search on rotation then translation maximizes the inlier
//! count before the continuous refinement.
//!
//! `T_ST` maps thermal coordinates into the stereo frame. Internally the
//! solver estimates `T_TS = T_ST⁻¹`, the transform that moves a stereo point
//! into the thermal frame, so the projection Jacobian applies unchanged.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calib::{CalibrationResult, OuterStep, StopReason};
use crate::error::{Error, Result};
use crate::geometry::{project, projection_jacobian, rotation_from_euler, PinholeIntrinsics, Pose, Vec2, Vec3, MIN_DEPTH};
use crate::optimizer::{self, JacobianRow, ResidualBlock, SolveOptions};
use crate::thermal::AttractionField;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReaeParams {
    /// Inlier threshold on the field value, pixels.
    pub inlier_threshold: f64,
    pub max_outer_iterations: usize,
    pub rotation_step_deg: f64,
    pub rotation_range_deg: f64,
    pub translation_step: f64,
    pub translation_range: f64,
    /// Rotation-then-translation sweeps, stopping early once a round changes nothing.
    pub rough_rounds: usize,
    /// Skip the grid search and refine from the initial pose directly.
    pub skip_rough: bool,
    pub pose_tolerance: f64,
    /// Relative REAE decrease treated as no progress once the inliers repeat.
    pub cost_tolerance: f64,
    pub solver: SolveOptions,
}

impl Default for ReaeParams {
    fn default() -> Self {
        Self {
            inlier_threshold: 10.0,
            max_outer_iterations: 30,
            rotation_step_deg: 1.0,
            rotation_range_deg: 6.0,
            translation_step: 0.04,
            translation_range: 0.12,
            rough_rounds: 1,
            skip_rough: false,
            pose_tolerance: 1e-6,
            cost_tolerance: 1e-8,
            solver: SolveOptions::default(),
        }
    }
}

impl ReaeParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.inlier_threshold >= 0.0
            && self.max_outer_iterations > 0
            && self.rotation_step_deg > 0.0
            && self.translation_step > 0.0
            && self.rotation_range_deg >= self.rotation_step_deg
            && self.translation_range >= self.translation_step
            && self.rough_rounds > 0
            && self.pose_tolerance > 0.0
            && self.cost_tolerance > 0.0;
        if !ok {
            return Err(Error::InvalidArgument(format!("invalid REAE params {self:?}")));
        }
        self.solver.validate()
    }
}

/// Edge points of one frame together with that frame's attraction field.
///
/// Laser edges are stored already mapped into the stereo frame.
#[derive(Clone, Debug)]
pub struct EdgeProjectionSet {
    stereo: Vec<Vec3>,
    laser: Vec<Vec3>,
    field: AttractionField,
    intrinsics: PinholeIntrinsics,
}

impl EdgeProjectionSet {
    pub fn new(
        stereo_edges: Vec<Vec3>,
        laser_edges: &[Vec3],
        t_sl: &Pose,
        field: AttractionField,
        intrinsics: PinholeIntrinsics,
    ) -> Result<Self> {
        if field.width() != intrinsics.width as usize || field.height() != intrinsics.height as usize {
            return Err(Error::Validation(format!(
                "attraction field is {}x{} but the thermal camera is {}x{}",
                field.width(),
                field.height(),
                intrinsics.width,
                intrinsics.height
            )));
        }
        Ok(Self {
            stereo: stereo_edges,
            laser: laser_edges.iter().map(|q| t_sl.transform_point(q)).collect(),
            field,
            intrinsics,
        })
    }

    pub fn stereo_points(&self) -> &[Vec3] {
        &self.stereo
    }

    /// Laser edge points in the stereo frame.
    pub fn laser_points(&self) -> &[Vec3] {
        &self.laser
    }

    pub fn field(&self) -> &AttractionField {
        &self.field
    }

    pub fn intrinsics(&self) -> &PinholeIntrinsics {
        &self.intrinsics
    }

    fn len(&self) -> usize {
        self.stereo.len() + self.laser.len()
    }

    /// Stereo points first, then laser points.
    fn point(&self, i: usize) -> &Vec3 {
        if i < self.stereo.len() {
            &self.stereo[i]
        } else {
            &self.laser[i - self.stereo.len()]
        }
    }
}

/// Thermal pixel of a stereo-frame point.
pub fn project_stereo_edge(p: &Vec3, t_st: &Pose, k: &PinholeIntrinsics) -> Result<Vec2> {
    project(k, &t_st.inverse().transform_point(p))
}

/// Thermal pixel of a laser-frame point.
pub fn project_laser_edge(q: &Vec3, t_st: &Pose, t_sl: &Pose, k: &PinholeIntrinsics) -> Result<Vec2> {
    project(k, &(t_st.inverse() * *t_sl).transform_point(q))
}

/// Indices of inlier points of one frame.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FrameInliers {
    pub stereo: Vec<usize>,
    pub laser: Vec<usize>,
}

impl FrameInliers {
    pub fn len(&self) -> usize {
        self.stereo.len() + self.laser.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn combined(&self, n_stereo: usize) -> impl Iterator<Item = usize> + '_ {
        self.stereo.iter().copied().chain(self.laser.iter().map(move |&i| i + n_stereo))
    }
}

fn inlier_value(set: &EdgeProjectionSet, p: &Vec3, t_ts: &Pose, th: f64) -> Option<f64> {
    let u = project(&set.intrinsics, &t_ts.transform_point(p)).ok()?;
    if !set.field.in_domain(&u) {
        return None;
    }
    let g = set.field.sample(&u).ok()?;
    (g <= th).then_some(g)
}

fn select_with(set: &EdgeProjectionSet, t_ts: &Pose, th: f64) -> FrameInliers {
    let pick = |points: &[Vec3]| -> Vec<usize> {
        points
            .iter()
            .enumerate()
            .filter(|(_, p)| inlier_value(set, p, t_ts, th).is_some())
            .map(|(i, _)| i)
            .collect()
    };
    FrameInliers {
        stereo: pick(&set.stereo),
        laser: pick(&set.laser),
    }
}

/// Points that project into the field interior with `G ≤ th`.
pub fn select_inliers(set: &EdgeProjectionSet, t_st: &Pose, th: f64) -> FrameInliers {
    select_with(set, &t_st.inverse(), th)
}

/// Inlier count and the summed field value over those inliers.
fn score_inliers(sets: &[EdgeProjectionSet], t_ts: &Pose, th: f64) -> (usize, f64) {
    let mut count = 0;
    let mut reae = 0.0;
    for s in sets {
        for p in s.stereo.iter().chain(&s.laser) {
            if let Some(g) = inlier_value(s, p, t_ts, th) {
                count += 1;
                reae += g;
            }
        }
    }
    (count, reae)
}

/// Field value used during a solve: clamped to the samplable region, and
/// `boundary` for points behind the camera.
fn clamped_value(set: &EdgeProjectionSet, pt: &Vec3, boundary: f64) -> (f64, Option<Vec2>) {
    if pt.z <= MIN_DEPTH {
        return (boundary, None);
    }
    let u = project(&set.intrinsics, pt).expect("depth checked");
    if set.field.in_domain(&u) {
        return (set.field.sample(&u).expect("in domain"), Some(u));
    }
    let c = Vec2::new(
        u.x.clamp(1.0, (set.field.width() - 2) as f64),
        u.y.clamp(1.0, (set.field.height() - 2) as f64),
    );
    (set.field.sample(&c).expect("clamped into domain"), None)
}

/// REAE over frozen inliers.
pub fn reae_cost(sets: &[EdgeProjectionSet], t_st: &Pose, inliers: &[FrameInliers], boundary: f64) -> Result<f64> {
    if inliers.iter().all(FrameInliers::is_empty) {
        return Err(Error::DegenerateProblem("no inlier edge points".into()));
    }
    Ok(reae_with(sets, &t_st.inverse(), inliers, boundary))
}

fn reae_with(sets: &[EdgeProjectionSet], t_ts: &Pose, inliers: &[FrameInliers], boundary: f64) -> f64 {
    sets.iter()
        .zip(inliers)
        .map(|(set, inl)| {
            inl.combined(set.stereo.len())
                .map(|i| clamped_value(set, &t_ts.transform_point(set.point(i)), boundary).0)
                .sum::<f64>()
        })
        .sum()
}

/// Derivative of the field value at the projection of stereo-frame point `p`
/// with respect to a left perturbation of `T_ST⁻¹`. Zero outside the field
/// interior or behind the camera.
pub fn reae_jacobian_row(p: &Vec3, field: &AttractionField, k: &PinholeIntrinsics, t_st: &Pose) -> JacobianRow {
    row_at(&t_st.inverse().transform_point(p), field, k)
}

fn row_at(pt: &Vec3, field: &AttractionField, k: &PinholeIntrinsics) -> JacobianRow {
    let Ok(u) = project(k, pt) else {
        return JacobianRow::zeros();
    };
    let (Ok(g), Ok(j)) = (field.sample_gradient_exact(&u), projection_jacobian(k, pt)) else {
        return JacobianRow::zeros();
    };
    g.transpose() * j
}

/// Frozen inliers of one frame as a residual block; residuals are field values.
pub struct ReaeBlock<'a> {
    set: &'a EdgeProjectionSet,
    points: Vec<Vec3>,
    boundary: f64,
}

impl<'a> ReaeBlock<'a> {
    pub fn new(set: &'a EdgeProjectionSet, inliers: &FrameInliers, boundary: f64) -> Self {
        Self {
            set,
            points: inliers.combined(set.stereo.len()).map(|i| *set.point(i)).collect(),
            boundary,
        }
    }
}

impl ResidualBlock for ReaeBlock<'_> {
    fn dim(&self) -> usize {
        self.points.len()
    }

    fn evaluate(&self, pose: &Pose, residuals: &mut [f64], mut jacobian: Option<&mut [JacobianRow]>) {
        for (i, p) in self.points.iter().enumerate() {
            let pt = pose.transform_point(p);
            let (g, interior) = clamped_value(self.set, &pt, self.boundary);
            residuals[i] = g;
            if let Some(jac) = jacobian.as_deref_mut() {
                jac[i] = match interior {
                    Some(_) => row_at(&pt, &self.set.field, &self.set.intrinsics),
                    None => JacobianRow::zeros(),
                };
            }
        }
    }
}

#[derive(Clone, Copy)]
struct Candidate {
    offset: [i32; 3],
    count: usize,
    reae: f64,
}

/// Highest count, then lowest REAE over the inliers, then smallest offset,
/// then lexicographic order. The REAE step separates the plateaus the count
/// alone forms around the optimum.
fn better(a: &Candidate, b: &Candidate) -> bool {
    let norm = |c: &Candidate| c.offset.iter().map(|v| v * v).sum::<i32>();
    a.count
        .cmp(&b.count)
        .then(b.reae.total_cmp(&a.reae))
        .then(norm(b).cmp(&norm(a)))
        .then(b.offset.cmp(&a.offset))
        .is_gt()
}

fn grid(half: f64, step: f64) -> Vec<[i32; 3]> {
    let n = (half / step + 1e-9).floor() as i32;
    let mut out = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            for k in -n..=n {
                out.push([i, j, k]);
            }
        }
    }
    out
}

fn sweep(sets: &[EdgeProjectionSet], offsets: &[[i32; 3]], th: f64, make: impl Fn([i32; 3]) -> Pose + Sync) -> Candidate {
    let scored: Vec<Candidate> = offsets
        .par_iter()
        .map(|&offset| {
            let (count, reae) = score_inliers(sets, &make(offset).inverse(), th);
            Candidate { offset, count, reae }
        })
        .collect();
    scored
        .into_iter()
        .reduce(|best, c| if better(&c, &best) { c } else { best })
        .expect("grid is never empty")
}

/// Grid search over rotation offsets (about the thermal camera axes, position
/// fixed) and then over translation offsets, maximizing the inlier count.
pub fn rough_calibrate(sets: &[EdgeProjectionSet], t_init: &Pose, params: &ReaeParams) -> Result<Pose> {
    params.validate()?;
    let th = params.inlier_threshold;
    let rot_grid = grid(params.rotation_range_deg, params.rotation_step_deg);
    let trans_grid = grid(params.translation_range, params.translation_step);
    let mut current = *t_init;
    for round in 0..params.rough_rounds {
        let base = current;
        let rot = sweep(sets, &rot_grid, th, |o| {
            let s = params.rotation_step_deg.to_radians();
            let r = base.rotation() * rotation_from_euler(o[0] as f64 * s, o[1] as f64 * s, o[2] as f64 * s);
            Pose::new_orthonormalized(r, *base.translation()).expect("rotation product")
        });
        if rot.count == 0 {
            return Err(Error::InitializationOutOfRange);
        }
        let s = params.rotation_step_deg.to_radians();
        let o = rot.offset;
        let rotated = Pose::new_orthonormalized(
            base.rotation() * rotation_from_euler(o[0] as f64 * s, o[1] as f64 * s, o[2] as f64 * s),
            *base.translation(),
        )?;
        let tr = sweep(sets, &trans_grid, th, |o| {
            let d = Vec3::new(o[0] as f64, o[1] as f64, o[2] as f64) * params.translation_step;
            Pose::new(*rotated.rotation(), rotated.translation() + d).expect("rotation unchanged")
        });
        let d = Vec3::new(tr.offset[0] as f64, tr.offset[1] as f64, tr.offset[2] as f64) * params.translation_step;
        current = Pose::new(*rotated.rotation(), rotated.translation() + d)?;
        debug!(
            "rough round {round}: rotation offset {:?}, translation offset {:?}, {} inliers",
            rot.offset, tr.offset, tr.count
        );
        if rot.offset == [0; 3] && tr.offset == [0; 3] {
            break;
        }
    }
    Ok(current)
}

/// Rough grid search followed by alternating inlier selection and REAE solves.
pub fn calibrate_thermal(sets: &[EdgeProjectionSet], t_init: &Pose, params: &ReaeParams) -> Result<CalibrationResult> {
    params.validate()?;
    if sets.is_empty() || sets.iter().all(|s| s.len() == 0) {
        return Err(Error::DegenerateProblem("no edge points in any frame".into()));
    }
    let th = params.inlier_threshold;
    if th <= 0.0 {
        // only projections exactly on an edge pixel centre would qualify
        return Err(Error::DegenerateProblem("an inlier threshold of 0 px leaves no inliers".into()));
    }
    let start = if params.skip_rough {
        *t_init
    } else {
        rough_calibrate(sets, t_init, params)?
    };
    let mut t_ts = start.inverse();
    let mut inliers: Vec<FrameInliers> = sets.iter().map(|s| select_with(s, &t_ts, th)).collect();
    let mut steps = Vec::new();
    let mut stop = StopReason::MaxIterations;

    for iteration in 0..params.max_outer_iterations {
        if inliers.iter().all(FrameInliers::is_empty) {
            return Err(Error::DegenerateProblem(format!(
                "no inlier edge points within {th} px at outer iteration {iteration}"
            )));
        }
        let blocks: Vec<ReaeBlock> = sets.iter().zip(&inliers).map(|(s, i)| ReaeBlock::new(s, i, th)).collect();
        let active: Vec<&dyn ResidualBlock> =
            blocks.iter().filter(|b| b.dim() > 0).map(|b| b as &dyn ResidualBlock).collect();
        let cost_before = reae_with(sets, &t_ts, &inliers, th);
        let candidate = match optimizer::solve(&active, &t_ts, &params.solver) {
            Ok(r) => r.pose,
            Err(Error::Stalled { best, .. }) => *best,
            Err(e) => return Err(e),
        };
        let cost_candidate = reae_with(sets, &candidate, &inliers, th);
        let accepted = cost_candidate <= cost_before;
        let (next, cost_after) = if accepted {
            (candidate, cost_candidate)
        } else {
            (t_ts, cost_before)
        };
        let change = (next * t_ts.inverse()).log()?.norm();
        steps.push(OuterStep {
            cost_before,
            cost_after,
            counts: inliers.iter().map(FrameInliers::len).collect(),
            pose_change: change,
            accepted,
        });
        debug!(
            "reae iteration {iteration}: {} inliers, cost {cost_before:.4} -> {cost_after:.4}, change {change:.3e}",
            inliers.iter().map(FrameInliers::len).sum::<usize>()
        );
        t_ts = next;
        let reselected: Vec<FrameInliers> = sets.iter().map(|s| select_with(s, &t_ts, th)).collect();
        if change < params.pose_tolerance {
            stop = StopReason::PoseChange;
            inliers = reselected;
            break;
        }
        let stalled = cost_before - cost_after <= params.cost_tolerance * cost_before;
        if reselected == inliers && stalled {
            stop = StopReason::Stable;
            break;
        }
        inliers = reselected;
    }

    Ok(CalibrationResult {
        pose: t_ts.inverse(),
        start,
        steps,
        stop,
        final_counts: inliers.iter().map(FrameInliers::len).collect(),
    })
}
