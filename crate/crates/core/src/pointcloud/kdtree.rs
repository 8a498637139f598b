use super::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

const LEAF_SIZE: usize = 8;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

/// Exact 3-D nearest-neighbor index. Ties resolve to the lowest original index.
#[derive(Clone, Debug)]
pub struct SpatialIndex {
    nodes: Vec<Node>,
    // points stored in tree order together with their original index
    points: Vec<Vec3>,
    order: Vec<usize>,
}

impl SpatialIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        Self::from_points(cloud.points())
    }

    pub fn from_points(points: &[Vec3]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyCloud);
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        let mut nodes = Vec::new();
        build_node(points, &mut order, 0, points.len(), &mut nodes);
        let stored = order.iter().map(|&i| points[i]).collect();
        Ok(Self {
            nodes,
            points: stored,
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest stored point as `(original index, point, squared distance)`.
    pub fn nearest(&self, q: &Vec3) -> (usize, Vec3, f64) {
        let mut best = (f64::INFINITY, usize::MAX, 0usize);
        self.search(0, q, &mut best);
        let (d2, index, slot) = best;
        (index, self.points[slot], d2)
    }

    fn search(&self, node: usize, q: &Vec3, best: &mut (f64, usize, usize)) {
        match self.nodes[node] {
            Node::Leaf { start, end } => {
                for slot in start..end {
                    let d2 = (self.points[slot] - q).norm_squared();
                    let index = self.order[slot];
                    if d2 < best.0 || (d2 == best.0 && index < best.1) {
                        *best = (d2, index, slot);
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = q[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.search(near, q, best);
                // equality must still be visited: the far side may hold a lower-index tie
                if diff * diff <= best.0 {
                    self.search(far, q, best);
                }
            }
        }
    }
}

fn build_node(points: &[Vec3], order: &mut [usize], start: usize, end: usize, nodes: &mut Vec<Node>) -> usize {
    let id = nodes.len();
    if end - start <= LEAF_SIZE {
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let slice = &mut order[start..end];
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for &i in slice.iter() {
        lo = lo.inf(&points[i]);
        hi = hi.sup(&points[i]);
    }
    let extent = hi - lo;
    if extent.max() == 0.0 {
        // all coincident
        nodes.push(Node::Leaf { start, end });
        return id;
    }
    let axis = extent.imax();
    let mid = slice.len() / 2;
    slice.select_nth_unstable_by(mid, |&a, &b| points[a][axis].total_cmp(&points[b][axis]));
    let value = points[slice[mid]][axis];
    nodes.push(Node::Leaf { start, end });
    // left holds coordinates <= value, right >= value
    let left = build_node(points, order, start, start + mid, nodes);
    let right = build_node(points, order, start + mid, end, nodes);
    nodes[id] = Node::Split { axis, value, left, right };
    id
}
