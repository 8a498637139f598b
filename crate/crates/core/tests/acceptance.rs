//! Acceptance checks on generated data with fixed seeds. Prints one line per
//! criterion. Set `ACCEPTANCE_STRICT=1` to exit non-zero when any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::Vector6;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tricalib::calib::CalibrationResult;
use tricalib::geometry::{project, projection_jacobian, rotation_error, translation_error, PinholeIntrinsics, Pose, Twist, Vec2, Vec3};
use tricalib::image::{EdgeMap, GrayImage};
use tricalib::laser_edges::{detect_laser_edges, LaserEdgeParams};
use tricalib::mficp::{calibrate_laser, mficp_cost, IcpFrame, IcpParams};
use tricalib::pipeline::{edge_projection_sets, icp_frames, process_frames, FrameData, ProcessedFrame, ThermalEdgeSource};
use tricalib::pointcloud::{OrganizedScan, PointCloud, SpatialIndex};
use tricalib::reae::{calibrate_thermal, reae_jacobian_row, rough_calibrate, EdgeProjectionSet, ReaeParams};
use tricalib::stereo::StereoParams;
use tricalib::synth::{generate, perturb_pose, predict_laser_edges, GroundTruth, SceneSpec, SynthFrame};
use tricalib::thermal::{build_attraction_field, CannyParams};

const FRAMES: usize = 6;
const RUNS_PER_SCENE: u64 = 20;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Preprocessed scene. Camera images are dropped once stereo edges are tagged.
struct Scene {
    seed: u64,
    truth: GroundTruth,
    thermal_k: PinholeIntrinsics,
    frames: Vec<FrameData>,
    processed: Vec<ProcessedFrame>,
    icp: Vec<IcpFrame>,
    synth_frames: Vec<SynthFrame>,
}

fn build_scene(spec: &SceneSpec) -> Scene {
    let ds = generate(spec).unwrap();
    let mut frames = ds.frame_data(true).unwrap();
    let processed = process_frames(&frames, &ds.stereo_rig(), &StereoParams::default(), &LaserEdgeParams::default()).unwrap();
    for f in &mut frames {
        f.left = GrayImage::new(0, 0, 0.0);
        f.right = GrayImage::new(0, 0, 0.0);
        f.thermal = None;
    }
    let icp = icp_frames(&processed).unwrap();
    let synth_frames = ds
        .frames
        .into_iter()
        .map(|mut f| {
            f.left = None;
            f.right = None;
            f.thermal = None;
            f
        })
        .collect();
    Scene {
        seed: spec.seed,
        truth: ds.truth,
        thermal_k: spec.rig.thermal,
        frames,
        processed,
        icp,
        synth_frames,
    }
}

impl Scene {
    fn edge_sets(&self, t_sl: &Pose) -> Vec<EdgeProjectionSet> {
        edge_projection_sets(
            &self.frames,
            &self.processed,
            t_sl,
            &self.thermal_k,
            ThermalEdgeSource::Auto,
            &CannyParams::default(),
        )
        .unwrap()
        .1
    }
}

fn noisy_suite() -> &'static [Scene] {
    static S: OnceLock<Vec<Scene>> = OnceLock::new();
    S.get_or_init(|| {
        SceneSpec::suite(FRAMES)
            .into_iter()
            .map(|s| build_scene(&s.with_noise(0.02, 0.02)))
            .collect()
    })
}

fn clean_suite() -> &'static [Scene] {
    static S: OnceLock<Vec<Scene>> = OnceLock::new();
    S.get_or_init(|| SceneSpec::suite(FRAMES).iter().map(build_scene).collect())
}

fn errors(a: &Pose, b: &Pose) -> (f64, f64) {
    (rotation_error(a, b).to_degrees(), 100.0 * translation_error(a, b))
}

fn laser_init(truth: &GroundTruth, run: u64) -> Pose {
    perturb_pose(&truth.t_sl(), (8.0, 12.0), (0.16, 0.24), run)
}

fn thermal_init(truth: &GroundTruth, run: u64) -> Pose {
    perturb_pose(&truth.t_st(), (4.0, 6.0), (0.08, 0.12), 1000 + run)
}

struct ThermalRuns {
    results: Vec<(u64, u64, CalibrationResult, f64, f64)>,
}

/// Criterion 2's 80 runs, kept for criterion 3. Each scene's edge sets use
/// the laser calibration of that scene's first run.
fn thermal_runs() -> &'static ThermalRuns {
    static R: OnceLock<ThermalRuns> = OnceLock::new();
    R.get_or_init(|| {
        let mut results = Vec::new();
        for scene in noisy_suite() {
            let t_sl = calibrate_laser(&scene.icp, &laser_init(&scene.truth, 0), &IcpParams::default())
                .unwrap()
                .pose;
            let sets = scene.edge_sets(&t_sl);
            for run in 0..RUNS_PER_SCENE {
                let r = calibrate_thermal(&sets, &thermal_init(&scene.truth, run), &ReaeParams::default()).unwrap();
                let (rot, trans) = errors(&r.pose, &scene.truth.t_st());
                results.push((scene.seed, run, r, rot, trans));
            }
        }
        ThermalRuns { results }
    })
}

fn criterion_1() -> Outcome {
    let (mut worst_rot, mut worst_trans, mut worst_time) = (0.0f64, 0.0f64, 0.0f64);
    let (mut failures, mut capped, mut runs) = (Vec::new(), 0, 0);
    for scene in noisy_suite() {
        for run in 0..RUNS_PER_SCENE {
            let t = Instant::now();
            let r = calibrate_laser(&scene.icp, &laser_init(&scene.truth, run), &IcpParams::default());
            let secs = t.elapsed().as_secs_f64();
            runs += 1;
            let r = match r {
                Ok(r) => r,
                Err(e) => {
                    failures.push(format!("scene {} run {run}: {e}", scene.seed));
                    continue;
                }
            };
            let (rot, trans) = errors(&r.pose, &scene.truth.t_sl());
            worst_rot = worst_rot.max(rot);
            worst_trans = worst_trans.max(trans);
            worst_time = worst_time.max(secs);
            capped += (!r.converged()) as usize;
            if !(rot < 1.0 && trans < 5.0 && secs < 5.0) {
                failures.push(format!("scene {} run {run}: {rot:.3} deg {trans:.2} cm {secs:.2} s", scene.seed));
            }
        }
    }
    outcome(
        failures.is_empty() && runs == 80,
        format!(
            "{runs} runs, worst {worst_rot:.3} deg / {worst_trans:.2} cm, slowest {worst_time:.2} s, {capped} stopped at the iteration cap{}",
            list(&failures)
        ),
    )
}

fn criterion_2() -> Outcome {
    let runs = &thermal_runs().results;
    let worst_rot = runs.iter().map(|r| r.3).fold(0.0, f64::max);
    let worst_trans = runs.iter().map(|r| r.4).fold(0.0, f64::max);
    let failures: Vec<String> = runs
        .iter()
        .filter(|r| !(r.3 < 0.5 && r.4 < 4.0))
        .map(|r| format!("scene {} run {}: {:.3} deg {:.2} cm", r.0, r.1, r.3, r.4))
        .collect();
    outcome(
        failures.is_empty() && runs.len() == 80,
        format!("{} runs, worst {worst_rot:.3} deg / {worst_trans:.2} cm{}", runs.len(), list(&failures)),
    )
}

fn criterion_3() -> Outcome {
    let runs = &thermal_runs().results;
    let mut failures = Vec::new();
    let mut most = 0;
    for (seed, run, r, _, _) in runs {
        most = most.max(r.outer_iterations());
        let rising = r
            .steps
            .iter()
            .filter(|s| s.accepted)
            .any(|s| s.cost_after > s.cost_before * (1.0 + 1e-12));
        if rising || !r.converged() || r.outer_iterations() > 20 {
            failures.push(format!(
                "scene {seed} run {run}: {:?} after {}, rising {rising}",
                r.stop,
                r.outer_iterations()
            ));
        }
    }
    outcome(
        failures.is_empty(),
        format!("{} runs, at most {most} outer iterations{}", runs.len(), list(&failures)),
    )
}

fn criterion_4() -> Outcome {
    let (mut worst_rot, mut worst_trans) = (0.0f64, 0.0f64);
    let (mut laser_rot, mut laser_trans) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for scene in clean_suite() {
        let t_sl = calibrate_laser(&scene.icp, &laser_init(&scene.truth, 0), &IcpParams::default())
            .unwrap()
            .pose;
        let (lr, lt) = errors(&t_sl, &scene.truth.t_sl());
        laser_rot = laser_rot.max(lr);
        laser_trans = laser_trans.max(lt);
        let sets = scene.edge_sets(&t_sl);
        for run in 0..5 {
            let r = calibrate_thermal(&sets, &thermal_init(&scene.truth, run), &ReaeParams::default()).unwrap();
            let (rot, trans) = errors(&r.pose, &scene.truth.t_st());
            worst_rot = worst_rot.max(rot);
            worst_trans = worst_trans.max(trans);
            if !(rot < 0.05 && trans < 1.0) {
                failures.push(format!("scene {} run {run}: {rot:.4} deg {trans:.3} cm", scene.seed));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "thermal worst {worst_rot:.4} deg / {worst_trans:.3} cm over 20 runs (laser stage, not gated: {laser_rot:.3} deg / {laser_trans:.2} cm){}",
            list(&failures)
        ),
    )
}

fn relative(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    diff / norm.max(1.0)
}

fn perturbed(delta: &Vector6<f64>, pose: &Pose) -> Pose {
    Twist::from_vector(delta).exp().unwrap().compose(pose)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let h = 1e-6;

    let mut worst_projection = 0.0f64;
    for _ in 0..1000 {
        let f = rng.random_range(300.0..900.0);
        let k = PinholeIntrinsics::new(f, f * rng.random_range(0.9..1.1), 320.0, 240.0, 640, 480).unwrap();
        let z = rng.random_range(0.5..20.0);
        let p = Vec3::new(rng.random_range(-0.5..0.5) * z, rng.random_range(-0.4..0.4) * z, z);
        let j = projection_jacobian(&k, &p).unwrap();
        for c in 0..6 {
            let mut d = Vector6::zeros();
            d[c] = h;
            let plus = project(&k, &perturbed(&d, &Pose::identity()).transform_point(&p)).unwrap();
            let minus = project(&k, &perturbed(&-d, &Pose::identity()).transform_point(&p)).unwrap();
            let fd: Vec2 = (plus - minus) / (2.0 * h);
            let col: Vec<f64> = j.column(c).iter().copied().collect();
            worst_projection = worst_projection.max(relative(&col, fd.as_slice()));
        }
    }

    // field-sampled rows over random segment maps
    let k = PinholeIntrinsics::new(150.0, 150.0, 80.0, 60.0, 160, 120).unwrap();
    let mut worst_field = 0.0f64;
    let mut checked = 0;
    let mut field_seed = 0;
    while checked < 1000 {
        let mut edges = EdgeMap::new(160, 120);
        for _ in 0..6 {
            let (x0, y0) = (rng.random_range(0.0..160.0), rng.random_range(0.0..120.0));
            let (x1, y1) = (rng.random_range(0.0..160.0), rng.random_range(0.0..120.0));
            for s in 0..=400 {
                let t = s as f64 / 400.0;
                let (x, y) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
                edges.set((x as usize).min(159), (y as usize).min(119), true);
            }
        }
        let field = build_attraction_field(&edges).unwrap();
        field_seed += 1;
        for _ in 0..50 {
            let v = Vector6::from_fn(|i, _| rng.random_range(-1.0..1.0) * if i < 3 { 0.1 } else { 0.05 });
            let t_st = Twist::from_vector(&v).exp().unwrap();
            let t_ts = t_st.inverse();
            let z = rng.random_range(1.0..10.0);
            let cam = Vec3::new(rng.random_range(-0.4..0.4) * z, rng.random_range(-0.3..0.3) * z, z);
            let p = t_st.transform_point(&cam);
            let u = project(&k, &cam).unwrap();
            let near_grid = (u.x - u.x.round()).abs() < 1e-3 || (u.y - u.y.round()).abs() < 1e-3;
            if near_grid || !field.in_domain(&u) || u.x < 2.0 || u.y < 2.0 || u.x > 157.0 || u.y > 117.0 {
                continue;
            }
            let row = reae_jacobian_row(&p, &field, &k, &t_st);
            let fd: Vec<f64> = (0..6)
                .map(|c| {
                    let mut d = Vector6::zeros();
                    d[c] = h;
                    let g = |pose: Pose| field.sample(&project(&k, &pose.transform_point(&p)).unwrap()).unwrap();
                    (g(perturbed(&d, &t_ts)) - g(perturbed(&-d, &t_ts))) / (2.0 * h)
                })
                .collect();
            worst_field = worst_field.max(relative(row.as_slice(), &fd));
            checked += 1;
        }
    }
    outcome(
        worst_projection < 1e-5 && worst_field < 1e-4,
        format!(
            "projection worst relative error {worst_projection:.2e} over 1000 points, field-sampled {worst_field:.2e} over {checked} points on {field_seed} maps"
        ),
    )
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut mismatches, mut lipschitz) = (0, 0);
    for m in 0..50 {
        let density = [0.002, 0.01, 0.05, 0.2, 0.6][m % 5];
        let mut edges = EdgeMap::new(64, 64);
        for y in 0..64 {
            for x in 0..64 {
                edges.set(x, y, rng.random_bool(density));
            }
        }
        if edges.is_empty() {
            edges.set(rng.random_range(0..64), rng.random_range(0..64), true);
        }
        let field = build_attraction_field(&edges).unwrap();
        let pixels: Vec<(usize, usize)> = edges.pixels().collect();
        for y in 0..64 {
            for x in 0..64 {
                let d2 = pixels
                    .iter()
                    .map(|&(ex, ey)| (ex as i64 - x as i64).pow(2) + (ey as i64 - y as i64).pow(2))
                    .min()
                    .unwrap();
                mismatches += (field.at(x, y) != (d2 as f64).sqrt()) as usize;
                if x + 1 < 64 {
                    lipschitz += ((field.at(x, y) - field.at(x + 1, y)).abs() > 1.0) as usize;
                }
                if y + 1 < 64 {
                    lipschitz += ((field.at(x, y) - field.at(x, y + 1)).abs() > 1.0) as usize;
                }
            }
        }
    }
    outcome(
        mismatches == 0 && lipschitz == 0,
        format!("50 masks: {mismatches} pixel mismatches, {lipschitz} neighbour pairs breaking 1-Lipschitz"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    for c in 0..20 {
        let n = rng.random_range(1..=2000);
        let points: Vec<Vec3> = (0..n)
            .map(|_| match c % 3 {
                // integer lattice: many equidistant candidates
                0 => Vec3::new(
                    rng.random_range(-5..5) as f64,
                    rng.random_range(-5..5) as f64,
                    rng.random_range(-5..5) as f64,
                ),
                _ => Vec3::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(-3.0..3.0)),
            })
            .collect();
        let mut points = points;
        if c % 3 == 1 {
            let copies: Vec<Vec3> = points.iter().take(n / 4).copied().collect();
            points.extend(copies);
        }
        let index = SpatialIndex::from_points(&points).unwrap();
        for q in 0..200 {
            let query = match q % 4 {
                0 => points[rng.random_range(0..points.len())],
                1 if c % 3 == 0 => Vec3::new(
                    rng.random_range(-10..10) as f64 * 0.5,
                    rng.random_range(-10..10) as f64 * 0.5,
                    rng.random_range(-10..10) as f64 * 0.5,
                ),
                _ => Vec3::new(rng.random_range(-12.0..12.0), rng.random_range(-12.0..12.0), rng.random_range(-4.0..4.0)),
            };
            let (bi, bd) = points
                .iter()
                .enumerate()
                .map(|(i, p)| (i, (p - query).norm_squared()))
                .fold((usize::MAX, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
            let (i, p, d) = index.nearest(&query);
            mismatches += (i != bi || d != bd || p != points[bi]) as usize;
        }
    }
    outcome(mismatches == 0, format!("20 clouds x 200 queries: {mismatches} mismatches against brute force"))
}

fn ring_ranges(scan: &OrganizedScan, ring: usize) -> Vec<Option<f64>> {
    scan.ring(ring).iter().map(|p| p.map(|p| p.norm())).collect()
}

fn criterion_8() -> Outcome {
    let params = LaserEdgeParams::default();
    let (mut frames, mut flagged_total, mut mismatches, mut far_side) = (0, 0, 0, 0);
    for scene in clean_suite() {
        for f in &scene.synth_frames {
            frames += 1;
            let predicted = predict_laser_edges(f, &params);
            let flagged = detect_laser_edges(&f.scan, &params).unwrap();
            let cols = f.scan.columns();
            for (i, &(r, c)) in flagged.cells.iter().enumerate() {
                let is_edge = flagged.cloud.is_edge(i);
                mismatches += (is_edge != predicted[r * cols + c]) as usize;
                if !is_edge {
                    continue;
                }
                flagged_total += 1;
                let ranges = ring_ranges(&f.scan, r);
                let here = ranges[c].unwrap();
                let nearer = (1..=params.k as isize).any(|j| {
                    [-j, j].iter().any(|&o| {
                        let n = c as isize + o;
                        let n = if params.wrap_around {
                            n.rem_euclid(cols as isize) as usize
                        } else if n < 0 || n >= cols as isize {
                            return false;
                        } else {
                            n as usize
                        };
                        ranges[n].is_some_and(|rn| here - rn > params.epsilon)
                    })
                });
                far_side += nearer as usize;
            }
            // undetected cells must not be predicted either
            let detected: std::collections::HashSet<(usize, usize)> = flagged.cells.iter().copied().collect();
            mismatches += predicted
                .iter()
                .enumerate()
                .filter(|&(i, &p)| p && !detected.contains(&(i / cols, i % cols)))
                .count();
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut constant_flags = 0;
    for _ in 0..20 {
        let (rings, cols) = (8, 360);
        let mut scan = OrganizedScan::new(rings, cols).unwrap();
        for ring in 0..rings {
            let range = rng.random_range(0.5..80.0);
            let elev: f64 = rng.random_range(-0.5..0.5);
            for c in 0..cols {
                let az = std::f64::consts::TAU * c as f64 / cols as f64;
                let dir = Vec3::new(elev.cos() * az.cos(), elev.cos() * az.sin(), elev.sin());
                scan.set(ring, c, Some(dir * range)).unwrap();
            }
        }
        constant_flags += detect_laser_edges(&scan, &params).unwrap().cloud.edge_count();
    }
    outcome(
        mismatches == 0 && far_side == 0 && constant_flags == 0 && flagged_total > 0,
        format!(
            "{frames} noiseless scans, {flagged_total} flags, {mismatches} differ from the silhouette prediction, {far_side} far-side flags; {constant_flags} flags on 160 constant rings"
        ),
    )
}

/// Three orthogonal planes with a box in the corner, irregularly sampled.
fn corner_points(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec3> {
    (0..n)
        .map(|i| {
            let (a, b) = (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0));
            match i % 4 {
                0 => Vec3::new(a, b, 0.0),
                1 => Vec3::new(a, 0.0, b),
                2 => Vec3::new(0.0, a, b),
                _ => Vec3::new(1.0 + a / 6.0, 1.0 + b / 6.0, 0.5),
            }
        })
        .collect()
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_twist = 0.0f64;
    for _ in 0..5 {
        let frames: Vec<IcpFrame> = (0..3)
            .map(|_| {
                let cloud = PointCloud::new(corner_points(&mut rng, 1500)).unwrap();
                IcpFrame::new(&cloud, &cloud).unwrap()
            })
            .collect();
        let r = calibrate_laser(&frames, &Pose::identity(), &IcpParams::default()).unwrap();
        worst_twist = worst_twist.max(r.pose.log().unwrap().norm());
    }

    let mut worst_cost = 0.0f64;
    let mut bundles = 0;
    for b in 0..50 {
        let bundle: Vec<(Vec<Vec3>, Vec<Vec3>)> = (0..3)
            .map(|_| {
                let cloud = |rng: &mut ChaCha8Rng, n: usize| -> Vec<Vec3> {
                    (0..n)
                        .map(|_| Vec3::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0), rng.random_range(-1.0..1.0)))
                        .collect()
                };
                let n_s = rng.random_range(50..400);
                let n_l = rng.random_range(50..400);
                (cloud(&mut rng, n_s), cloud(&mut rng, n_l))
            })
            .collect();
        let v = Vector6::from_fn(|i, _| rng.random_range(-1.0..1.0) * if i < 3 { 0.3 } else { 0.1 });
        let t_sl = Twist::from_vector(&v).exp().unwrap();
        let gate = [0.2, 0.5, 1.0, f64::INFINITY][b % 4];
        let frames: Vec<IcpFrame> = bundle
            .iter()
            .map(|(s, l)| IcpFrame::new(&PointCloud::new(s.clone()).unwrap(), &PointCloud::new(l.clone()).unwrap()).unwrap())
            .collect();
        let t_ls = t_sl.inverse();
        let mut brute = 0.0;
        let mut count = 0;
        for (s, l) in &bundle {
            for p in s {
                let pp = t_ls.transform_point(p);
                let d2 = l.iter().map(|q| (pp - q).norm_squared()).fold(f64::INFINITY, f64::min);
                if d2 <= gate * gate {
                    brute += d2;
                    count += 1;
                }
            }
        }
        match mficp_cost(&frames, &t_sl, gate) {
            Ok(c) => {
                worst_cost = worst_cost.max((c.cost - brute).abs());
                if c.correspondences != count {
                    worst_cost = f64::INFINITY;
                }
            }
            Err(_) if count == 0 => {}
            Err(_) => worst_cost = f64::INFINITY,
        }
        bundles += 1;
    }
    outcome(
        worst_twist < 1e-8 && worst_cost <= 1e-9,
        format!("identical clouds: worst twist norm {worst_twist:.2e}; cost vs brute force over {bundles} bundles: worst difference {worst_cost:.2e}"),
    )
}

fn criterion_10() -> Outcome {
    let params = ReaeParams::default();
    let (mut hits, mut trials) = (0, 0);
    let (mut worst_rot, mut worst_trans) = (0.0f64, 0.0f64);
    for scene in clean_suite() {
        let sets = scene.edge_sets(&scene.truth.t_sl());
        for t in 0..10 {
            let init = perturb_pose(&scene.truth.t_st(), (0.0, 6.0), (0.0, 0.12), 2000 + t);
            let rough = rough_calibrate(&sets, &init, &params).unwrap();
            let (rot, trans) = errors(&rough, &scene.truth.t_st());
            worst_rot = worst_rot.max(rot);
            worst_trans = worst_trans.max(trans);
            trials += 1;
            hits += (rot <= 1.0 && trans <= 4.0) as usize;
        }
    }
    outcome(
        hits == trials,
        format!("{hits}/{trials} rough searches within 1 deg / 4 cm, worst {worst_rot:.3} deg / {worst_trans:.2} cm"),
    )
}

fn list(failures: &[String]) -> String {
    match failures.len() {
        0 => String::new(),
        n => format!("; {n} failing, first: {}", failures[..n.min(3)].join(", ")),
    }
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 10] = [
        (1, "laser calibration on noisy scenes", criterion_1),
        (2, "thermal calibration on noisy scenes", criterion_2),
        (3, "thermal cost monotone and convergent", criterion_3),
        (4, "zero-noise end-to-end", criterion_4),
        (5, "analytic Jacobians vs finite differences", criterion_5),
        (6, "distance transform", criterion_6),
        (7, "nearest-neighbour index", criterion_7),
        (8, "laser edge detector", criterion_8),
        (9, "laser registration fixed point and cost", criterion_9),
        (10, "rough search basin", criterion_10),
    ];
    let filter: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let start = Instant::now();
    let mut failed = Vec::new();
    for (n, name, check) in criteria {
        if filter.is_some_and(|f| f != n) {
            continue;
        }
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {verdict} ({name}, {:.1} s): {}", t.elapsed().as_secs_f64(), result.detail);
        if !result.pass {
            failed.push(n);
        }
    }
    println!("acceptance: {} failed {:?}, {:.0} s total", failed.len(), failed, start.elapsed().as_secs_f64());
    if !failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
