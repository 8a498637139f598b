use serde::{Deserialize, Serialize};

use crate::geometry::Vec3;

/// Axis-aligned box in world coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoxSpec {
    pub fn new(min: [f64; 3], max: [f64; 3]) -> Self {
        Self { min, max }
    }

    pub fn lo(&self) -> Vec3 {
        Vec3::from(self.min)
    }

    pub fn hi(&self) -> Vec3 {
        Vec3::from(self.max)
    }

    pub fn is_valid(&self) -> bool {
        (0..3).all(|a| self.min[a].is_finite() && self.max[a].is_finite() && self.min[a] < self.max[a])
    }

    /// Entry distance along a ray with unit or non-unit direction, if hit in front of the origin.
    pub fn intersect(&self, origin: &Vec3, dir: &Vec3) -> Option<f64> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for a in 0..3 {
            if dir[a].abs() < 1e-300 {
                if origin[a] < self.min[a] || origin[a] > self.max[a] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[a];
            let (mut ta, mut tb) = ((self.min[a] - origin[a]) * inv, (self.max[a] - origin[a]) * inv);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
        }
        (t0 <= t1 && t0 > 1e-9).then_some(t0)
    }

    /// The 12 edges with, for each, the two faces it bounds. Faces are
    /// numbered `2 * axis + side` (side 1 = max face).
    fn edges(&self) -> Vec<(Vec3, Vec3, [usize; 2])> {
        let mut out = Vec::with_capacity(12);
        for axis in 0..3 {
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            for su in 0..2 {
                for sv in 0..2 {
                    let mut a = [0.0; 3];
                    a[u] = if su == 0 { self.min[u] } else { self.max[u] };
                    a[v] = if sv == 0 { self.min[v] } else { self.max[v] };
                    let mut b = a;
                    a[axis] = self.min[axis];
                    b[axis] = self.max[axis];
                    out.push((Vec3::from(a), Vec3::from(b), [2 * u + su, 2 * v + sv]));
                }
            }
        }
        out
    }

    fn faces_toward(&self, eye: &Vec3, face: usize) -> bool {
        let axis = face / 2;
        if face % 2 == 1 {
            eye[axis] > self.max[axis]
        } else {
            eye[axis] < self.min[axis]
        }
    }

    /// Edges separating a face turned toward `eye` from one turned away: the
    /// outline of the box as seen from `eye`.
    pub fn contour_edges(&self, eye: &Vec3) -> Vec<(Vec3, Vec3)> {
        self.edges()
            .into_iter()
            .filter(|(_, _, f)| self.faces_toward(eye, f[0]) != self.faces_toward(eye, f[1]))
            .map(|(a, b, _)| (a, b))
            .collect()
    }

    /// Distance from `eye` to the nearest face plane of any contour edge; small
    /// values mean the outline is about to change.
    pub fn contour_margin(&self, eye: &Vec3) -> f64 {
        (0..3)
            .flat_map(|a| [(eye[a] - self.min[a]).abs(), (eye[a] - self.max[a]).abs()])
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub t: f64,
    pub object: usize,
}

/// Nearest hit over all boxes; ties go to the lowest index.
pub fn cast(boxes: &[BoxSpec], origin: &Vec3, dir: &Vec3) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for (object, b) in boxes.iter().enumerate() {
        if let Some(t) = b.intersect(origin, dir) {
            if best.is_none_or(|h| t < h.t) {
                best = Some(Hit { t, object });
            }
        }
    }
    best
}

/// Whether `target` (lying on box `owner`) is visible from `eye`.
pub fn visible(boxes: &[BoxSpec], eye: &Vec3, target: &Vec3, owner: usize) -> bool {
    let d = target - eye;
    boxes
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != owner)
        .all(|(_, b)| b.intersect(eye, &d).is_none_or(|t| t >= 1.0 - 1e-9))
}
