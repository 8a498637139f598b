pub mod calib;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod geometry;
pub mod image;
pub mod laser_edges;
pub mod mficp;
pub mod optimizer;
pub mod pipeline;
pub mod pointcloud;
pub mod reae;
pub mod stereo;
pub mod synth;
pub mod thermal;

pub use error::{Error, Result};
