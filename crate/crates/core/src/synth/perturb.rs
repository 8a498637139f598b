use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::geometry::{exp_map, Pose, Twist, Vec3};

fn random_direction(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(StandardNormal.sample(rng), StandardNormal.sample(rng), StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Offsets `t` by a rotation of random axis and angle in `rot_range_deg`,
/// and a translation of random direction and length in `trans_range`.
pub fn perturb_pose(t: &Pose, rot_range_deg: (f64, f64), trans_range: (f64, f64), seed: u64) -> Pose {
    assert!(
        0.0 <= rot_range_deg.0 && rot_range_deg.0 <= rot_range_deg.1 && 0.0 <= trans_range.0 && trans_range.0 <= trans_range.1,
        "perturbation ranges must satisfy 0 <= min <= max"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angle = uniform(&mut rng, rot_range_deg).to_radians();
    let axis = random_direction(&mut rng);
    let dist = uniform(&mut rng, trans_range);
    let dir = random_direction(&mut rng);
    let rot = exp_map(&Twist::new(Vec3::zeros(), axis * angle)).expect("finite twist");
    Pose::new_orthonormalized(rot.rotation() * t.rotation(), t.translation() + dir * dist)
        .expect("rotation product is orthonormal")
}
