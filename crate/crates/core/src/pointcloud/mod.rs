//! Point clouds, organized laser scans and exact nearest-neighbor search.

mod io;
mod kdtree;

pub use io::{load_cloud, load_scan, save_cloud, save_scan, CloudFormat};
pub use kdtree::SpatialIndex;

use crate::error::{Error, Result};
use crate::geometry::{Pose, Vec3};

/// Unordered points with an optional per-point edge flag.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec3>,
    edges: Option<Vec<bool>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec3>) -> Result<Self> {
        validate_points(&points)?;
        Ok(Self {
            points,
            edges: None,
        })
    }

    pub fn with_edges(points: Vec<Vec3>, edges: Vec<bool>) -> Result<Self> {
        validate_points(&points)?;
        if edges.len() != points.len() {
            return Err(Error::Validation(format!(
                "{} edge flags for {} points",
                edges.len(),
                points.len()
            )));
        }
        Ok(Self {
            points,
            edges: Some(edges),
        })
    }

    pub fn points(&self) -> &[Vec3] {
        &self.points
    }

    pub fn edges(&self) -> Option<&[bool]> {
        self.edges.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn is_edge(&self, i: usize) -> bool {
        self.edges.as_ref().is_some_and(|e| e[i])
    }

    pub fn set_edges(&mut self, edges: Vec<bool>) -> Result<()> {
        if edges.len() != self.points.len() {
            return Err(Error::Validation("edge flag count mismatch".into()));
        }
        self.edges = Some(edges);
        Ok(())
    }

    /// Points whose edge flag is set.
    pub fn edge_points(&self) -> Vec<Vec3> {
        match &self.edges {
            Some(flags) => self
                .points
                .iter()
                .zip(flags)
                .filter(|(_, &e)| e)
                .map(|(p, _)| *p)
                .collect(),
            None => Vec::new(),
        }
    }

    pub fn edge_count(&self) -> usize {
        self.edges.as_ref().map_or(0, |e| e.iter().filter(|&&f| f).count())
    }

    pub fn transformed(&self, pose: &Pose) -> PointCloud {
        PointCloud {
            points: self.points.iter().map(|p| pose.transform_point(p)).collect(),
            edges: self.edges.clone(),
        }
    }
}

fn validate_points(points: &[Vec3]) -> Result<()> {
    match points.iter().position(|p| !p.iter().all(|c| c.is_finite())) {
        Some(i) => Err(Error::Validation(format!("point {i} has non-finite coordinates"))),
        None => Ok(()),
    }
}

/// Laser points indexed by (ring, column); columns follow azimuth order.
#[derive(Clone, Debug, PartialEq)]
pub struct OrganizedScan {
    rings: usize,
    columns: usize,
    cells: Vec<Option<Vec3>>,
}

impl OrganizedScan {
    /// All cells start as no-return.
    pub fn new(rings: usize, columns: usize) -> Result<Self> {
        if rings == 0 || columns == 0 {
            return Err(Error::Validation("scan needs at least one ring and column".into()));
        }
        Ok(Self {
            rings,
            columns,
            cells: vec![None; rings * columns],
        })
    }

    pub fn rings(&self) -> usize {
        self.rings
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn get(&self, ring: usize, col: usize) -> Option<&Vec3> {
        self.cells[ring * self.columns + col].as_ref()
    }

    pub fn set(&mut self, ring: usize, col: usize, point: Option<Vec3>) -> Result<()> {
        if ring >= self.rings || col >= self.columns {
            return Err(Error::Validation(format!(
                "cell ({ring}, {col}) outside {}x{} scan",
                self.rings, self.columns
            )));
        }
        if let Some(p) = &point {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::Validation(format!("cell ({ring}, {col}) is not finite")));
            }
            if p.norm() <= 0.0 {
                return Err(Error::Validation(format!("cell ({ring}, {col}) has zero range")));
            }
        }
        self.cells[ring * self.columns + col] = point;
        Ok(())
    }

    pub fn ring(&self, ring: usize) -> &[Option<Vec3>] {
        &self.cells[ring * self.columns..(ring + 1) * self.columns]
    }

    pub fn valid_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    /// Valid points in (ring, column) order together with their cell coordinates.
    pub fn valid_cells(&self) -> impl Iterator<Item = (usize, usize, &Vec3)> + '_ {
        self.cells.iter().enumerate().filter_map(move |(i, c)| {
            c.as_ref().map(|p| (i / self.columns, i % self.columns, p))
        })
    }

    pub fn to_cloud(&self) -> PointCloud {
        PointCloud {
            points: self.cells.iter().flatten().copied().collect(),
            edges: None,
        }
    }
}
