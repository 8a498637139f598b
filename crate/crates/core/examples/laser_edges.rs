//! Depth-discontinuity flags on a hand-built ring scan.

use tricalib::geometry::Vec3;
use tricalib::laser_edges::{detect_laser_edges, edge_stats, LaserEdgeParams};
use tricalib::pointcloud::OrganizedScan;

fn main() -> tricalib::Result<()> {
    // a wall at 6 m with a post at 3 m covering columns 40..60
    let (rings, cols) = (4, 360);
    let mut scan = OrganizedScan::new(rings, cols)?;
    for ring in 0..rings {
        let elev = (ring as f64 - 1.5).to_radians();
        for c in 0..cols {
            let az = (c as f64).to_radians();
            let range = if (40..60).contains(&c) { 3.0 } else { 6.0 };
            let dir = Vec3::new(elev.cos() * az.cos(), elev.cos() * az.sin(), elev.sin());
            scan.set(ring, c, Some(dir * range))?;
        }
    }
    let flagged = detect_laser_edges(&scan, &LaserEdgeParams::default())?;
    let edge_cols: Vec<usize> = flagged
        .cells
        .iter()
        .enumerate()
        .filter(|(i, (r, _))| *r == 0 && flagged.cloud.is_edge(*i))
        .map(|(_, (_, c))| *c)
        .collect();
    println!("ring 0 edge columns: {edge_cols:?}");
    println!("{:?}", edge_stats(&flagged));
    Ok(())
}
