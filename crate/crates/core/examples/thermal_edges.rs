//! Canny edges, filtering and the distance field used to score projections.

use tricalib::geometry::Vec2;
use tricalib::image::GrayImage;
use tricalib::thermal::{build_attraction_field, extract_thermal_edges, CannyParams};

fn main() -> tricalib::Result<()> {
    // a warm rectangle on a cool background
    let image = GrayImage::from_fn(160, 120, |x, y| {
        if (40..120).contains(&x) && (30..90).contains(&y) {
            200.0
        } else {
            40.0
        }
    });
    let (edges, stats) = extract_thermal_edges(&image, &CannyParams::default())?;
    println!("{} edge pixels, {:?}", edges.count(), stats);

    let field = build_attraction_field(&edges)?;
    for u in [Vec2::new(40.0, 60.0), Vec2::new(50.5, 60.0), Vec2::new(80.0, 60.25)] {
        println!(
            "field at ({}, {}) = {:.3}, gradient {:?}",
            u.x,
            u.y,
            field.sample(&u)?,
            field.sample_gradient_exact(&u)?.as_slice()
        );
    }
    Ok(())
}
