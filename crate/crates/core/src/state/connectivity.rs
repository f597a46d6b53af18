use crate::config::ConnectivityMode;
use crate::geometry::Point;
use crate::image::{interp_intensity, GrayImage};

/// Sample positions along `p → q` at unit arc-length spacing (at most),
/// both endpoints included.
pub fn segment_samples(p: Point, q: Point) -> impl Iterator<Item = Point> {
    let len = p.dist(q);
    let steps = len.ceil().max(1.0) as usize;
    let d = q - p;
    (0..=steps).map(move |i| {
        if i == steps {
            q
        } else {
            p + d * (i as f64 / steps as f64)
        }
    })
}

/// Connectivity `Γ` of the edge `p → q` in `img`.
///
/// [`ConnectivityMode::Mean`] averages the nearest-pixel intensities over
/// the samples of [`segment_samples`]; [`ConnectivityMode::Literal`]
/// additionally divides by the segment length. A zero-length edge yields
/// the intensity at the point.
pub fn connectivity(p: Point, q: Point, img: &GrayImage, mode: ConnectivityMode) -> f64 {
    let len = p.dist(q);
    if len == 0.0 {
        return interp_intensity(img, p) as f64;
    }
    let (sum, n) = segment_samples(p, q)
        .fold((0.0f64, 0usize), |(s, n), x| (s + interp_intensity(img, x) as f64, n + 1));
    let mean = sum / n as f64;
    match mode {
        ConnectivityMode::Mean => mean,
        ConnectivityMode::Literal => mean / len,
    }
}

/// Maximum nearest-pixel intensity along `p → q`.
pub fn max_along(p: Point, q: Point, img: &GrayImage) -> f64 {
    segment_samples(p, q)
        .map(|x| interp_intensity(img, x) as f64)
        .fold(0.0, f64::max)
}
