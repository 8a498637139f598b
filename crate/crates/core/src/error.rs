use std::path::PathBuf;

use crate::geometry::Pose;

/// Errors produced anywhere in the calibration pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("point is behind the camera (z = {z})")]
    BehindCamera { z: f64 },

    #[error("rotation angle is within 1e-6 of pi, axis is ambiguous")]
    DegenerateRotation,

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("triangulated point lies behind camera {camera}")]
    Cheirality { camera: &'static str },

    #[error("point cloud is empty")]
    EmptyCloud,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Image { path: PathBuf, message: String },

    #[error("query ({u:.3}, {v:.3}) lies outside the samplable field")]
    OutOfField { u: f64, v: f64 },

    #[error("edge map contains no edge pixels")]
    EmptyEdges,

    #[error("no stereo point found a laser correspondence within the gate")]
    NoOverlap,

    #[error("optimizer stalled after {iterations} iterations (damping exceeded 1e12)")]
    Stalled { best: Box<Pose>, iterations: usize },

    #[error("degenerate problem: {0}")]
    DegenerateProblem(String),

    #[error("initialization out of range: no grid candidate produced inliers")]
    InitializationOutOfRange,

    #[error("scene leaves the {sensor} without any visible surface")]
    EmptyView { sensor: String },

    #[error("unknown frame id {id:?}; valid ids: {valid:?}")]
    UnknownFrame { id: String, valid: Vec<String> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateProblem(_)
            | Error::NoOverlap
            | Error::EmptyEdges
            | Error::Stalled { .. }
            | Error::DegenerateGeometry(_)
            | Error::DegenerateRotation => 3,
            Error::InitializationOutOfRange => 4,
            _ => 2,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
