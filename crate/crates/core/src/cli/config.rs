//! TOML configuration. Every section is optional and falls back to the
//! module defaults; unknown keys are rejected.
//!
//! ```toml
//! [stereo]        # sobel_threshold, min_triangulation_angle, max_depth
//! [laser_edges]   # k, epsilon, wrap_around
//! [canny]         # sigma, low_threshold, high_threshold, min_length, clutter_filter, clutter_fill_ratio
//! [thermal]       # edge_source = "auto" | "canny" | "supplied"
//! [icp]           # max_iterations, gating, initial_gate, gate_decay, min_gate, pose_tolerance
//! [icp.solver]    # max_iterations, initial_damping, cost_tolerance, step_tolerance
//! [reae]          # inlier_threshold, max_outer_iterations, rotation_step_deg, rotation_range_deg,
//!                 # translation_step, translation_range, rough_rounds, skip_rough, pose_tolerance,
//!                 # cost_tolerance
//! [reae.solver]
//! [overlay]       # depth_max, marker_radius
//! ```
//!
//! Single values can be overridden as `section.key=value`, where the value
//! uses TOML syntax and bare words are taken as strings.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laser_edges::LaserEdgeParams;
use crate::mficp::IcpParams;
use crate::pipeline::ThermalEdgeSource;
use crate::reae::ReaeParams;
use crate::stereo::StereoParams;
use crate::thermal::CannyParams;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThermalConfig {
    pub edge_source: ThermalEdgeSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OverlayParams {
    /// Points at or beyond this camera depth (meters) are not drawn.
    pub depth_max: f64,
    pub marker_radius: usize,
}

impl Default for OverlayParams {
    fn default() -> Self {
        Self {
            depth_max: 10.0,
            marker_radius: 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub stereo: StereoParams,
    pub laser_edges: LaserEdgeParams,
    pub canny: CannyParams,
    pub thermal: ThermalConfig,
    pub icp: IcpParams,
    pub reae: ReaeParams,
    pub overlay: OverlayParams,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl Config {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| line_of(text, s.start));
            Error::parse(origin, line, e.message().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text, path)
    }

    pub fn validate(&self) -> Result<()> {
        self.laser_edges.validate()?;
        self.canny.validate()?;
        self.icp.validate()?;
        self.reae.validate()?;
        if !(self.stereo.max_depth > 0.0) || !(self.stereo.min_triangulation_angle >= 0.0) {
            return Err(Error::InvalidArgument(format!("invalid stereo params {:?}", self.stereo)));
        }
        if !(self.overlay.depth_max >= 0.0) {
            return Err(Error::InvalidArgument("overlay.depth_max must be non-negative".into()));
        }
        Ok(())
    }

    /// Applies one `section.key=value` override.
    pub fn set(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("override '{assignment}' is not key=value")))?;
        let (key, raw) = (key.trim(), raw.trim());
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));

        let mut root = toml::Value::try_from(&*self).map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let mut node = &mut root;
        let parts: Vec<&str> = key.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let table = node
                .as_table_mut()
                .ok_or_else(|| Error::InvalidArgument(format!("'{key}' does not name a config entry")))?;
            if i + 1 == parts.len() {
                if !table.contains_key(*part) {
                    return Err(Error::InvalidArgument(format!("unknown config key '{key}'")));
                }
                table.insert(part.to_string(), value.clone());
                break;
            }
            node = table
                .get_mut(*part)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown config section in '{key}'")))?;
        }
        let updated: Self = root
            .try_into()
            .map_err(|e: toml::de::Error| Error::InvalidArgument(format!("{key}: {}", e.message())))?;
        updated.validate()?;
        *self = updated;
        Ok(())
    }
}
