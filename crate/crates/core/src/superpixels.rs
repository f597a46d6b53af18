//! Superpixel extraction: threshold the baseline map, reduce it to its
//! morphological skeleton and keep a sparse, confidence-ordered subset of the
//! skeleton pixels.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::image::{BinaryImage, GrayImage};
use crate::morphology::{erode, open};

/// A selected pixel together with its baseline confidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperPixel {
    pub position: Point,
    pub confidence: f32,
}

/// Strict `>` comparison of every pixel against `threshold` (compared in
/// the map's own precision).
pub fn binarize(map: &GrayImage, threshold: f64) -> BinaryImage {
    let t = threshold as f32;
    let data = map.data().iter().map(|&v| v > t).collect();
    BinaryImage::from_vec(map.height(), map.width(), data).expect("dims come from a valid image")
}

/// The skeleton subsets `S_k = E^k(X) \ open(E^k(X))` for `k = 0, 1, ...`
/// until the eroded set vanishes.
pub fn skeleton_subsets(x: &BinaryImage) -> Vec<BinaryImage> {
    let mut subsets = Vec::new();
    let mut eroded = x.clone();
    while !eroded.is_empty() {
        subsets.push(eroded.and_not(&open(&eroded)));
        eroded = erode(&eroded);
    }
    subsets
}

/// Lantuéjoul skeleton: the union of all skeleton subsets.
pub fn skeletonize(x: &BinaryImage) -> BinaryImage {
    skeleton_subsets(x)
        .into_iter()
        .fold(BinaryImage::new(x.height(), x.width()), |acc, s| acc.or(&s))
}

/// Greedy selection: walk skeleton pixels by decreasing confidence (ties in
/// row-major order) and keep a pixel only if it is farther than `min_dist`
/// from every pixel kept so far.
pub fn select_superpixels(skel: &BinaryImage, map: &GrayImage, min_dist: f64) -> Vec<SuperPixel> {
    assert_eq!(skel.dims(), map.dims(), "skeleton and map dimensions differ");
    let mut candidates: Vec<(usize, usize, f32)> =
        skel.foreground().map(|(r, c)| (r, c, map.get(r, c))).collect();
    // Stable sort keeps row-major order among equal confidences.
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2));

    let cell = min_dist.max(1.0);
    let mut grid: HashMap<(i64, i64), Vec<Point>> = HashMap::new();
    let mut out = Vec::new();
    for (r, c, conf) in candidates {
        let p = Point::new(c as f64, r as f64);
        let (gx, gy) = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
        let blocked = (-1..=1).any(|dy| {
            (-1..=1).any(|dx| {
                grid.get(&(gx + dx, gy + dy))
                    .is_some_and(|pts| pts.iter().any(|q| p.dist(*q) <= min_dist))
            })
        });
        if !blocked {
            grid.entry((gx, gy)).or_default().push(p);
            out.push(SuperPixel { position: p, confidence: conf });
        }
    }
    out
}
