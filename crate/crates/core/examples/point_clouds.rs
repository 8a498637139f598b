//! PLY round trip and nearest-neighbour queries.

use tricalib::geometry::Vec3;
use tricalib::pointcloud::{load_cloud, save_cloud, CloudFormat, PointCloud, SpatialIndex};

fn main() -> tricalib::Result<()> {
    let points: Vec<Vec3> = (0..1000)
        .map(|i| {
            let t = i as f64 * 0.01;
            Vec3::new(t.cos() * (1.0 + t), t.sin() * (1.0 + t), 0.1 * t)
        })
        .collect();
    let edges = (0..points.len()).map(|i| i % 10 == 0).collect();
    let cloud = PointCloud::with_edges(points, edges)?;

    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("spiral.ply");
    save_cloud(&path, &cloud, CloudFormat::AsciiPly)?;
    let loaded = load_cloud(&path, CloudFormat::AsciiPly)?;
    println!("{} points, {} edge points after reload", loaded.len(), loaded.edge_count());

    let index = SpatialIndex::build(&loaded)?;
    let q = Vec3::new(1.5, 1.5, 0.5);
    let (i, p, d2) = index.nearest(&q);
    println!("nearest to {:?}: #{i} at {:?}, distance {:.4}", q.as_slice(), p.as_slice(), d2.sqrt());
    Ok(())
}
