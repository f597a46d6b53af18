use std::collections::HashMap;

use crate::geometry::Point;

/// Uniform bucket grid for fixed-radius neighbor queries.
pub(crate) struct PointGrid {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl PointGrid {
    pub fn new(points: &[Point], cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(*p, cell)).or_default().push(i);
        }
        Self { cell, buckets }
    }

    fn key(p: Point, cell: f64) -> (i64, i64) {
        ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64)
    }

    /// Indices of all points within `radius` (inclusive) of `center`, in
    /// ascending index order.
    pub fn within(&self, points: &[Point], center: Point, radius: f64) -> Vec<usize> {
        let span = (radius / self.cell).ceil() as i64;
        let (cx, cy) = Self::key(center, self.cell);
        let mut out = Vec::new();
        for gy in cy - span..=cy + span {
            for gx in cx - span..=cx + span {
                if let Some(ids) = self.buckets.get(&(gx, gy)) {
                    out.extend(ids.iter().copied().filter(|&i| points[i].dist(center) <= radius));
                }
            }
        }
        out.sort_unstable();
        out
    }
}
