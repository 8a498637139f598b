//! Depth-discontinuity edges on organized laser scans.
//!
//! A point is kept when the `k` azimuth neighbours on one side lie on the same
//! surface (range within `epsilon`) and all `k` on the other side are deeper
//! by more than `epsilon`. Only the near side of a discontinuity qualifies,
//! which is the side a nearby camera still sees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pointcloud::{OrganizedScan, PointCloud};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaserEdgeParams {
    /// Neighbourhood radius in columns.
    pub k: usize,
    /// Depth-difference threshold in meters.
    pub epsilon: f64,
    /// Treat the first and last columns as adjacent (full 360° scans).
    pub wrap_around: bool,
}

impl Default for LaserEdgeParams {
    fn default() -> Self {
        Self {
            k: 3,
            epsilon: 0.3,
            wrap_around: true,
        }
    }
}

impl LaserEdgeParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!("invalid laser edge params {self:?}")));
        }
        Ok(())
    }
}

/// All valid scan points with edge flags, plus the cell each came from.
#[derive(Clone, Debug)]
pub struct FlaggedScan {
    pub cloud: PointCloud,
    pub cells: Vec<(usize, usize)>,
    pub rings: usize,
}

/// Per-ring edge flags for one ring of ranges; `None` marks no-return.
pub fn flag_ring(ranges: &[Option<f64>], params: &LaserEdgeParams) -> Vec<bool> {
    let n = ranges.len();
    let k = params.k;
    let eps = params.epsilon;
    let neighbour = |c: usize, offset: isize| -> Option<f64> {
        let idx = c as isize + offset;
        let idx = if params.wrap_around {
            idx.rem_euclid(n as isize) as usize
        } else if idx < 0 || idx >= n as isize {
            return None;
        } else {
            idx as usize
        };
        ranges[idx]
    };
    (0..n)
        .map(|c| {
            let Some(r) = ranges[c] else { return false };
            let side = |sign: isize| -> Option<(bool, bool)> {
                let mut close = true;
                let mut deeper = true;
                for j in 1..=k as isize {
                    let rn = neighbour(c, sign * j)?;
                    close &= (rn - r).abs() <= eps;
                    deeper &= rn - r > eps;
                }
                Some((close, deeper))
            };
            match (side(-1), side(1)) {
                (Some((a0, b0)), Some((a1, b1))) => (a0 && b1) || (b0 && a1),
                _ => false,
            }
        })
        .collect()
}

pub fn detect_laser_edges(scan: &OrganizedScan, params: &LaserEdgeParams) -> Result<FlaggedScan> {
    params.validate()?;
    if scan.columns() <= 2 * params.k {
        return Err(Error::InvalidArgument(format!(
            "{} columns per ring cannot host a {}-column window",
            scan.columns(),
            2 * params.k + 1
        )));
    }
    let per_ring: Vec<Vec<bool>> = (0..scan.rings())
        .into_par_iter()
        .map(|ring| {
            let ranges: Vec<Option<f64>> = scan.ring(ring).iter().map(|c| c.map(|p| p.norm())).collect();
            flag_ring(&ranges, params)
        })
        .collect();

    let mut points = Vec::with_capacity(scan.valid_count());
    let mut flags = Vec::with_capacity(scan.valid_count());
    let mut cells = Vec::with_capacity(scan.valid_count());
    for (ring, col, p) in scan.valid_cells() {
        points.push(*p);
        flags.push(per_ring[ring][col]);
        cells.push((ring, col));
    }
    Ok(FlaggedScan {
        cloud: PointCloud::with_edges(points, flags)?,
        cells,
        rings: scan.rings(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeStats {
    pub edges_per_ring: Vec<usize>,
    pub points: usize,
    pub edges: usize,
    pub edge_fraction: f64,
}

pub fn edge_stats(scan: &FlaggedScan) -> EdgeStats {
    let mut edges_per_ring = vec![0; scan.rings];
    let mut edges = 0;
    for (i, &(ring, _)) in scan.cells.iter().enumerate() {
        if scan.cloud.is_edge(i) {
            edges_per_ring[ring] += 1;
            edges += 1;
        }
    }
    let points = scan.cloud.len();
    EdgeStats {
        edges_per_ring,
        points,
        edges,
        edge_fraction: if points == 0 { 0.0 } else { edges as f64 / points as f64 },
    }
}
