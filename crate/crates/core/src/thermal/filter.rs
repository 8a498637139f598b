use serde::{Deserialize, Serialize};

use crate::image::EdgeMap;

/// Components thinner than this (in either bounding-box dimension) are never
/// treated as cluttered.
const MIN_CLUTTER_EXTENT: usize = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterStats {
    pub input_pixels: usize,
    pub removed_short: usize,
    pub removed_cluttered: usize,
}

impl FilterStats {
    pub fn cluttered_fraction(&self) -> f64 {
        if self.input_pixels == 0 {
            0.0
        } else {
            self.removed_cluttered as f64 / self.input_pixels as f64
        }
    }
}

/// 8-connected components in row-major discovery order.
pub fn connected_components(edges: &EdgeMap) -> Vec<Vec<(usize, usize)>> {
    let (w, h) = (edges.width(), edges.height());
    let mut seen = vec![false; w * h];
    let mut out = Vec::new();
    for (sx, sy) in edges.pixels() {
        if seen[sy * w + sx] {
            continue;
        }
        seen[sy * w + sx] = true;
        let mut comp = vec![(sx, sy)];
        let mut head = 0;
        while head < comp.len() {
            let (x, y) = comp[head];
            head += 1;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if edges.get_signed(nx, ny) {
                        let j = ny as usize * w + nx as usize;
                        if !seen[j] {
                            seen[j] = true;
                            comp.push((nx as usize, ny as usize));
                        }
                    }
                }
            }
        }
        out.push(comp);
    }
    out
}

/// Removes components with fewer than `min_length` pixels and, when
/// `clutter_fill_ratio` is set, blob-like components whose pixel count
/// exceeds that fraction of their bounding box.
pub fn filter_edges(edges: &EdgeMap, min_length: usize, clutter_fill_ratio: Option<f64>) -> (EdgeMap, FilterStats) {
    let mut out = EdgeMap::new(edges.width(), edges.height());
    let mut stats = FilterStats {
        input_pixels: edges.count(),
        ..Default::default()
    };
    for comp in connected_components(edges) {
        if comp.len() < min_length {
            stats.removed_short += comp.len();
            continue;
        }
        if let Some(ratio) = clutter_fill_ratio {
            let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
            for &(x, y) in &comp {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
            let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
            if bw.min(bh) >= MIN_CLUTTER_EXTENT && comp.len() as f64 / (bw * bh) as f64 > ratio {
                stats.removed_cluttered += comp.len();
                continue;
            }
        }
        for (x, y) in comp {
            out.set(x, y, true);
        }
    }
    (out, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(len: usize) -> EdgeMap {
        // an L-shaped chain so the bounding box is not degenerate
        let mut e = EdgeMap::new(80, 80);
        let across = len / 2;
        for x in 0..across {
            e.set(5 + x, 10, true);
        }
        for y in 0..len - across {
            e.set(5 + across - 1, 11 + y, true);
        }
        assert_eq!(e.count(), len);
        e
    }

    #[test]
    fn short_chain_removed() {
        let (out, stats) = filter_edges(&chain(49), 50, Some(0.5));
        assert!(out.is_empty());
        assert_eq!(stats.removed_short, 49);
    }

    #[test]
    fn threshold_length_survives() {
        let (out, _) = filter_edges(&chain(50), 50, Some(0.5));
        assert_eq!(out.count(), 50);
        let mut line = EdgeMap::new(80, 5);
        for x in 0..50 {
            line.set(x + 10, 2, true);
        }
        assert_eq!(filter_edges(&line, 50, Some(0.5)).0.count(), 50);
    }

    #[test]
    fn solid_blob_is_cluttered() {
        let mut e = EdgeMap::new(30, 30);
        for y in 5..15 {
            for x in 5..15 {
                e.set(x, y, true);
            }
        }
        let (out, stats) = filter_edges(&e, 50, Some(0.5));
        assert!(out.is_empty());
        assert_eq!(stats.removed_cluttered, 100);
        assert_eq!(filter_edges(&e, 50, None).0.count(), 100);
    }

    #[test]
    fn filtering_is_idempotent_subset() {
        let mut e = chain(60);
        for y in 40..52 {
            for x in 40..52 {
                e.set(x, y, true);
            }
        }
        e.set(70, 70, true);
        let (once, _) = filter_edges(&e, 50, Some(0.5));
        let (twice, _) = filter_edges(&once, 50, Some(0.5));
        assert_eq!(once, twice);
        assert!(once.pixels().all(|(x, y)| e.get(x, y)));
        assert_eq!(once.count(), 60);
    }
}
