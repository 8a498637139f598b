//! Levenberg–Marquardt over a single SE(3) pose.
//!
//! Residual blocks expose their residual vector and, optionally, analytic
//! Jacobian rows with respect to a left perturbation `exp(δξ) · T`. The
//! solver minimizes the plain sum of squared residuals.

use nalgebra::{Matrix6, RowVector6, Vector6};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{exp_map, Pose, Twist};

pub type JacobianRow = RowVector6<f64>;

/// Damping beyond which the solver gives up.
const MAX_DAMPING: f64 = 1e12;

/// A group of residuals that depend on the pose being estimated.
pub trait ResidualBlock: Sync {
    /// Number of residuals; constant for a given block.
    fn dim(&self) -> usize;

    /// Writes `dim()` residuals and, when requested, one Jacobian row per residual.
    fn evaluate(&self, pose: &Pose, residuals: &mut [f64], jacobian: Option<&mut [JacobianRow]>);
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    pub max_iterations: usize,
    pub initial_damping: f64,
    /// Relative cost decrease below which the solve is considered converged.
    pub cost_tolerance: f64,
    /// Twist norm of a step below which the solve is considered converged.
    pub step_tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            initial_damping: 1e-4,
            cost_tolerance: 1e-8,
            step_tolerance: 1e-10,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0
            || !(self.initial_damping > 0.0)
            || !(self.cost_tolerance > 0.0)
            || !(self.step_tolerance > 0.0)
        {
            return Err(Error::InvalidArgument(format!(
                "solver options must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    CostTolerance,
    StepTolerance,
    MaxIterations,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub pose: Pose,
    /// Cost at the start followed by the cost after every accepted step.
    pub cost_trace: Vec<f64>,
    pub termination: Termination,
    pub iterations: usize,
}

impl SolveReport {
    pub fn final_cost(&self) -> f64 {
        *self.cost_trace.last().expect("trace always holds the initial cost")
    }
}

struct Linearization {
    cost: f64,
    hessian: Matrix6<f64>,
    gradient: Vector6<f64>,
}

fn linearize(blocks: &[&dyn ResidualBlock], pose: &Pose) -> Linearization {
    let parts: Vec<Linearization> = blocks
        .par_iter()
        .map(|block| {
            let m = block.dim();
            let mut r = vec![0.0; m];
            let mut j = vec![JacobianRow::zeros(); m];
            block.evaluate(pose, &mut r, Some(&mut j));
            let mut hessian = Matrix6::zeros();
            let mut gradient = Vector6::zeros();
            let mut cost = 0.0;
            for (ri, ji) in r.iter().zip(&j) {
                cost += ri * ri;
                hessian += ji.transpose() * ji;
                gradient += ji.transpose() * *ri;
            }
            Linearization {
                cost,
                hessian,
                gradient,
            }
        })
        .collect();
    parts.into_iter().fold(
        Linearization {
            cost: 0.0,
            hessian: Matrix6::zeros(),
            gradient: Vector6::zeros(),
        },
        |mut acc, p| {
            acc.cost += p.cost;
            acc.hessian += p.hessian;
            acc.gradient += p.gradient;
            acc
        },
    )
}

/// Sum of squared residuals over all blocks.
pub fn evaluate_cost(blocks: &[&dyn ResidualBlock], pose: &Pose) -> f64 {
    let parts: Vec<f64> = blocks
        .par_iter()
        .map(|block| {
            let mut r = vec![0.0; block.dim()];
            block.evaluate(pose, &mut r, None);
            r.iter().map(|v| v * v).sum()
        })
        .collect();
    parts.into_iter().sum()
}

/// Minimizes the summed squared residuals starting from `x0`.
pub fn solve(blocks: &[&dyn ResidualBlock], x0: &Pose, opts: &SolveOptions) -> Result<SolveReport> {
    if blocks.is_empty() {
        return Err(Error::InvalidArgument("solve needs at least one residual block".into()));
    }
    opts.validate()?;

    let mut pose = *x0;
    let mut lin = linearize(blocks, &pose);
    let mut trace = vec![lin.cost];
    let done = |pose: Pose, trace: Vec<f64>, termination, iterations| {
        Ok(SolveReport {
            pose,
            cost_trace: trace,
            termination,
            iterations,
        })
    };

    if lin.cost == 0.0 || lin.gradient.norm() == 0.0 {
        return done(pose, trace, Termination::CostTolerance, 0);
    }

    let mut damping = opts.initial_damping;
    for iteration in 1..=opts.max_iterations {
        loop {
            let mut system = lin.hessian;
            for d in 0..6 {
                system[(d, d)] += damping;
            }
            let Some(chol) = system.cholesky() else {
                damping *= 2.0;
                if damping > MAX_DAMPING {
                    return Err(Error::Stalled {
                        best: Box::new(pose),
                        iterations: iteration,
                    });
                }
                continue;
            };
            let step = -chol.solve(&lin.gradient);
            if step.norm() < opts.step_tolerance {
                return done(pose, trace, Termination::StepTolerance, iteration);
            }
            let candidate = exp_map(&Twist::from_vector(&step))?.compose(&pose);
            let cost = evaluate_cost(blocks, &candidate);
            if cost < lin.cost {
                let relative = (lin.cost - cost) / lin.cost;
                pose = candidate;
                trace.push(cost);
                damping *= 0.5;
                if cost == 0.0 || relative < opts.cost_tolerance {
                    return done(pose, trace, Termination::CostTolerance, iteration);
                }
                lin = linearize(blocks, &pose);
                break;
            }
            if (cost - lin.cost).abs() <= opts.cost_tolerance * lin.cost {
                return done(pose, trace, Termination::CostTolerance, iteration);
            }
            damping *= 2.0;
            if damping > MAX_DAMPING {
                return Err(Error::Stalled {
                    best: Box::new(pose),
                    iterations: iteration,
                });
            }
        }
    }
    done(pose, trace, Termination::MaxIterations, opts.max_iterations)
}

/// Central differences of a block along the six left-perturbation directions.
pub fn finite_difference_jacobian(block: &dyn ResidualBlock, x: &Pose, step: f64) -> Result<Vec<JacobianRow>> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument("finite-difference step must be positive".into()));
    }
    let m = block.dim();
    let mut rows = vec![JacobianRow::zeros(); m];
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    for c in 0..6 {
        let mut d = Vector6::zeros();
        d[c] = step;
        let xp = exp_map(&Twist::from_vector(&d))?.compose(x);
        let xm = exp_map(&Twist::from_vector(&-d))?.compose(x);
        block.evaluate(&xp, &mut plus, None);
        block.evaluate(&xm, &mut minus, None);
        for (row, (p, q)) in rows.iter_mut().zip(plus.iter().zip(&minus)) {
            row[c] = (p - q) / (2.0 * step);
        }
    }
    Ok(rows)
}
