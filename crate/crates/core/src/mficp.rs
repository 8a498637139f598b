//! Multi-frame point-to-point ICP for the laser→stereo extrinsic.
//!
//! Stereo points are mapped into the laser frame with `T_SL⁻¹` and matched to
//! their nearest laser point; all frames share one pose. The solver works on
//! `T_LS = T_SL⁻¹` so the point residual has the plain left-perturbation
//! Jacobian `[I | −p'^]`.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calib::{CalibrationResult, OuterStep, StopReason};
use crate::error::{Error, Result};
use crate::geometry::{hat, Pose, Vec3};
use crate::optimizer::{self, JacobianRow, ResidualBlock, SolveOptions};
use crate::pointcloud::{PointCloud, SpatialIndex};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcpParams {
    pub max_iterations: usize,
    /// Disable to use every nearest neighbour regardless of distance.
    pub gating: bool,
    pub initial_gate: f64,
    pub gate_decay: f64,
    pub min_gate: f64,
    /// Twist norm between outer iterations below which the loop stops.
    pub pose_tolerance: f64,
    pub solver: SolveOptions,
}

impl Default for IcpParams {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            gating: true,
            initial_gate: 1.0,
            gate_decay: 0.9,
            min_gate: 0.2,
            pose_tolerance: 1e-6,
            solver: SolveOptions::default(),
        }
    }
}

impl IcpParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.max_iterations > 0
            && self.initial_gate > 0.0
            && self.min_gate > 0.0
            && self.gate_decay > 0.0
            && self.gate_decay <= 1.0
            && self.pose_tolerance > 0.0;
        if !ok {
            return Err(Error::InvalidArgument(format!("invalid ICP params {self:?}")));
        }
        self.solver.validate()
    }

    /// Gate for a zero-based outer iteration; infinite when gating is off.
    pub fn gate(&self, iteration: usize) -> f64 {
        if !self.gating {
            return f64::INFINITY;
        }
        (self.initial_gate * self.gate_decay.powi(iteration as i32)).max(self.min_gate)
    }
}

/// A stereo cloud and the spatial index over its laser scan.
pub struct IcpFrame {
    stereo: Vec<Vec3>,
    laser: SpatialIndex,
}

impl IcpFrame {
    pub fn new(stereo: &PointCloud, laser: &PointCloud) -> Result<Self> {
        if stereo.is_empty() {
            return Err(Error::EmptyCloud);
        }
        Ok(Self {
            stereo: stereo.points().to_vec(),
            laser: SpatialIndex::build(laser)?,
        })
    }

    pub fn stereo(&self) -> &[Vec3] {
        &self.stereo
    }

    /// Gated (stereo, laser) pairs under `t_ls`, plus the number of gated-out points.
    fn correspondences(&self, t_ls: &Pose, gate: f64) -> (Vec<(Vec3, Vec3)>, usize) {
        let gate2 = gate * gate;
        let nearest: Vec<Option<(Vec3, Vec3)>> = self
            .stereo
            .par_iter()
            .map(|p| {
                let (_, q, d2) = self.laser.nearest(&t_ls.transform_point(p));
                (d2 <= gate2).then_some((*p, q))
            })
            .collect();
        let ungated = nearest.iter().filter(|n| n.is_none()).count();
        (nearest.into_iter().flatten().collect(), ungated)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IcpCost {
    pub cost: f64,
    pub correspondences: usize,
    pub ungated: usize,
}

/// Registration cost of all frames under `t_sl` with nearest-neighbour gating.
pub fn mficp_cost(frames: &[IcpFrame], t_sl: &Pose, gate: f64) -> Result<IcpCost> {
    let t_ls = t_sl.inverse();
    let mut out = IcpCost {
        cost: 0.0,
        correspondences: 0,
        ungated: 0,
    };
    for frame in frames {
        let (pairs, ungated) = frame.correspondences(&t_ls, gate);
        out.cost += pairs.iter().map(|(p, q)| (t_ls.transform_point(p) - q).norm_squared()).sum::<f64>();
        out.correspondences += pairs.len();
        out.ungated += ungated;
    }
    if out.correspondences == 0 {
        return Err(Error::NoOverlap);
    }
    Ok(out)
}

/// `T_LS · p − q` for frozen pairs.
struct PairBlock {
    pairs: Vec<(Vec3, Vec3)>,
}

impl ResidualBlock for PairBlock {
    fn dim(&self) -> usize {
        3 * self.pairs.len()
    }

    fn evaluate(&self, pose: &Pose, residuals: &mut [f64], jacobian: Option<&mut [JacobianRow]>) {
        for (i, (p, q)) in self.pairs.iter().enumerate() {
            let pp = pose.transform_point(p);
            let r = pp - q;
            residuals[3 * i..3 * i + 3].copy_from_slice(r.as_slice());
        }
        if let Some(jac) = jacobian {
            for (i, (p, _)) in self.pairs.iter().enumerate() {
                let skew = -hat(&pose.transform_point(p));
                for a in 0..3 {
                    let mut row = JacobianRow::zeros();
                    row[a] = 1.0;
                    for b in 0..3 {
                        row[3 + b] = skew[(a, b)];
                    }
                    jac[3 * i + a] = row;
                }
            }
        }
    }
}

/// Estimates `T_SL` by alternating correspondence search and a joint solve.
pub fn calibrate_laser(frames: &[IcpFrame], t_sl_init: &Pose, params: &IcpParams) -> Result<CalibrationResult> {
    params.validate()?;
    if frames.is_empty() {
        return Err(Error::InvalidArgument("laser calibration needs at least one frame".into()));
    }
    let mut t_ls = t_sl_init.inverse();
    let mut steps = Vec::new();
    let mut stop = StopReason::MaxIterations;

    for iteration in 0..params.max_iterations {
        let gate = params.gate(iteration);
        let blocks: Vec<PairBlock> = frames
            .iter()
            .map(|f| PairBlock {
                pairs: f.correspondences(&t_ls, gate).0,
            })
            .collect();
        let counts: Vec<usize> = blocks.iter().map(|b| b.pairs.len()).collect();
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::NoOverlap);
        }
        let active: Vec<&dyn ResidualBlock> = blocks
            .iter()
            .filter(|b| !b.pairs.is_empty())
            .map(|b| b as &dyn ResidualBlock)
            .collect();
        let report = match optimizer::solve(&active, &t_ls, &params.solver) {
            Ok(r) => r,
            Err(Error::Stalled { best, iterations }) => {
                return Err(Error::Stalled {
                    best: Box::new(best.inverse()),
                    iterations,
                })
            }
            Err(e) => return Err(e),
        };
        let change = (report.pose * t_ls.inverse()).log()?.norm();
        steps.push(OuterStep {
            cost_before: report.cost_trace[0],
            cost_after: report.final_cost(),
            counts,
            pose_change: change,
            accepted: true,
        });
        debug!(
            "icp iteration {iteration}: gate {gate:.3} cost {:.6e} change {change:.3e}",
            report.final_cost()
        );
        t_ls = report.pose;
        if change < params.pose_tolerance {
            stop = StopReason::PoseChange;
            break;
        }
    }

    let final_gate = params.gate(steps.len().saturating_sub(1));
    let final_counts = frames
        .iter()
        .map(|f| f.correspondences(&t_ls, final_gate).0.len())
        .collect();
    Ok(CalibrationResult {
        pose: t_ls.inverse(),
        start: *t_sl_init,
        steps,
        stop,
        final_counts,
    })
}
