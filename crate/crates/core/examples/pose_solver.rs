//! Least-squares pose fit with a user-defined residual block.

use tricalib::geometry::{hat, rotation_error, translation_error, EulerPose, Pose, Vec3};
use tricalib::optimizer::{solve, JacobianRow, ResidualBlock, SolveOptions};

/// Residual `T p - q` per pair.
struct Pairs(Vec<(Vec3, Vec3)>);

impl ResidualBlock for Pairs {
    fn dim(&self) -> usize {
        3 * self.0.len()
    }

    fn evaluate(&self, pose: &Pose, residuals: &mut [f64], jacobian: Option<&mut [JacobianRow]>) {
        for (i, (p, q)) in self.0.iter().enumerate() {
            let r = pose.transform_point(p) - q;
            residuals[3 * i..3 * i + 3].copy_from_slice(r.as_slice());
        }
        if let Some(jac) = jacobian {
            for (i, (p, _)) in self.0.iter().enumerate() {
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

fn main() -> tricalib::Result<()> {
    let truth = EulerPose::new(0.2, -0.1, 0.05, 10.0, -5.0, 25.0).to_pose()?;
    let pairs: Vec<(Vec3, Vec3)> = (0..50)
        .map(|i| {
            let f = i as f64;
            let p = Vec3::new((f * 0.37).sin() * 3.0, (f * 0.73).cos() * 2.0, 1.0 + (f * 0.11).sin());
            (p, truth.transform_point(&p))
        })
        .collect();
    let block = Pairs(pairs);
    let report = solve(&[&block], &Pose::identity(), &SolveOptions::default())?;
    println!("{:?} after {} iterations", report.termination, report.iterations);
    println!("cost trace: {:?}", report.cost_trace);
    println!(
        "error {:.2e} rad, {:.2e} m",
        rotation_error(&report.pose, &truth),
        translation_error(&report.pose, &truth)
    );
    Ok(())
}
