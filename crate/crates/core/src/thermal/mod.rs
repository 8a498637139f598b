//! Thermal-image edges and the distance field they induce.

mod canny;
mod field;
mod filter;

use log::warn;
use serde::{Deserialize, Serialize};

pub use canny::{canny, gaussian_blur};
pub use field::{build_attraction_field, AttractionField};
pub use filter::{connected_components, filter_edges, FilterStats};

use crate::error::{Error, Result};
use crate::image::{EdgeMap, GrayImage};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CannyParams {
    pub sigma: f64,
    pub low_threshold: f64,
    pub high_threshold: f64,
    /// Components with fewer pixels are dropped.
    pub min_length: usize,
    /// Drop blob-like components (bounding-box fill ratio above `clutter_fill_ratio`).
    pub clutter_filter: bool,
    pub clutter_fill_ratio: f64,
}

impl Default for CannyParams {
    fn default() -> Self {
        Self {
            sigma: 1.4,
            low_threshold: 40.0,
            high_threshold: 100.0,
            min_length: 50,
            clutter_filter: true,
            clutter_fill_ratio: 0.5,
        }
    }
}

impl CannyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0) || !(self.low_threshold >= 0.0) || !(self.high_threshold >= self.low_threshold) {
            return Err(Error::InvalidArgument(format!("invalid canny params {self:?}")));
        }
        Ok(())
    }
}

/// Canny followed by component filtering.
pub fn extract_thermal_edges(image: &GrayImage, params: &CannyParams) -> Result<(EdgeMap, FilterStats)> {
    params.validate()?;
    let raw = canny(image, params);
    let (edges, stats) = filter_edges(
        &raw,
        params.min_length,
        params.clutter_filter.then_some(params.clutter_fill_ratio),
    );
    if stats.cluttered_fraction() > 0.3 {
        warn!(
            "{:.0}% of thermal edge pixels were rejected as cluttered",
            100.0 * stats.cluttered_fraction()
        );
    }
    Ok((edges, stats))
}
