//! Points, polygonal chains, regions and the small amount of plane geometry
//! shared by every stage.
//!
//! Coordinates are continuous pixels with `x` growing to the right and `y`
//! growing downward. Orientations are axial (a line at `θ` is the same line at
//! `θ + π`) and are kept in `(-π/2, π/2]`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2-D cross product `self × other`.
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Rotates by `angle` (counter-clockwise in a y-up frame, clockwise on screen)
    /// around `center`.
    pub fn rotate_about(self, center: Point, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        let d = self - center;
        Point::new(center.x + c * d.x - s * d.y, center.y + s * d.x + c * d.y)
    }

    /// Unit direction vector of an orientation.
    pub fn direction(theta: f64) -> Point {
        let (s, c) = theta.sin_cos();
        Point::new(c, s)
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// An ordered sequence of at least two points with no immediate repeats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct PolyChain {
    points: Vec<Point>,
}

impl PolyChain {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::TooFewPoints { min: 2, got: points.len() });
        }
        for (index, p) in points.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::NonFinite { index });
            }
        }
        if let Some(index) = points.windows(2).position(|w| w[0] == w[1]) {
            return Err(Error::RepeatedPoint { index });
        }
        Ok(Self { points })
    }

    /// Builds a chain after dropping consecutive duplicates. Fails if fewer than
    /// two distinct points remain.
    pub fn from_points_dedup(mut points: Vec<Point>) -> Result<Self> {
        points.dedup();
        Self::new(points)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn first(&self) -> Point {
        self.points[0]
    }

    pub fn last(&self) -> Point {
        self.points[self.points.len() - 1]
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.points.windows(2).map(|w| (w[0], w[1]))
    }

    pub fn length(&self) -> f64 {
        self.segments().map(|(a, b)| a.dist(b)).sum()
    }

    /// Applies `f` to every point, keeping the order. Fails only if the map
    /// collapses consecutive points or produces non-finite values.
    pub fn map_points(&self, f: impl Fn(Point) -> Point) -> Result<PolyChain> {
        PolyChain::new(self.points.iter().map(|&p| f(p)).collect())
    }

    /// Points along the chain spaced `step` apart in arc length, both ends
    /// included. Each sample carries the direction of the segment it lies on.
    pub fn resample(&self, step: f64) -> Vec<(Point, Point)> {
        let mut out = Vec::new();
        for (i, (a, b)) in self.segments().enumerate() {
            let len = a.dist(b);
            let dir = (b - a) * (1.0 / len);
            let n = (len / step).ceil().max(1.0) as usize;
            let start = if i == 0 { 0 } else { 1 };
            for j in start..=n {
                let t = j as f64 / n as f64;
                out.push((a + (b - a) * t, dir));
            }
        }
        out
    }

    /// Euclidean distance from `p` to the nearest point of the chain.
    pub fn distance_to(&self, p: Point) -> f64 {
        self.segments()
            .map(|(a, b)| point_segment_distance(p, a, b))
            .fold(f64::INFINITY, f64::min)
    }
}

impl TryFrom<Vec<Point>> for PolyChain {
    type Error = Error;
    fn try_from(points: Vec<Point>) -> Result<Self> {
        PolyChain::new(points)
    }
}

impl From<PolyChain> for Vec<Point> {
    fn from(c: PolyChain) -> Vec<Point> {
        c.points
    }
}

/// A closed polygonal chain; the last point connects back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct Region {
    boundary: Vec<Point>,
}

impl Region {
    pub fn new(boundary: Vec<Point>) -> Result<Self> {
        if boundary.len() < 3 {
            return Err(Error::TooFewPoints { min: 3, got: boundary.len() });
        }
        if let Some(index) = boundary.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { boundary })
    }

    /// Axis-aligned rectangle with corners `(x0, y0)` and `(x1, y1)`.
    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            boundary: vec![
                Point::new(x0, y0),
                Point::new(x1, y0),
                Point::new(x1, y1),
                Point::new(x0, y1),
            ],
        }
    }

    pub fn boundary(&self) -> &[Point] {
        &self.boundary
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.boundary.len();
        (0..n).map(move |i| (self.boundary[i], self.boundary[(i + 1) % n]))
    }

    pub fn contains(&self, p: Point) -> bool {
        point_in_region(p, self)
    }
}

impl TryFrom<Vec<Point>> for Region {
    type Error = Error;
    fn try_from(points: Vec<Point>) -> Result<Self> {
        Region::new(points)
    }
}

impl From<Region> for Vec<Point> {
    fn from(r: Region) -> Vec<Point> {
        r.boundary
    }
}

const ON_SEGMENT_EPS: f64 = 1e-9;

/// Crossing-parity containment. Points on the boundary count as inside.
pub fn point_in_region(p: Point, region: &Region) -> bool {
    if region
        .edges()
        .any(|(a, b)| point_segment_distance(p, a, b) <= ON_SEGMENT_EPS)
    {
        return true;
    }
    // Half-open rule on y so vertices shared by two edges are counted once.
    let mut inside = false;
    for (a, b) in region.edges() {
        if (a.y > p.y) != (b.y > p.y) {
            let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x_cross {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn point_segment_distance(p: Point, a: Point, b: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.dist(a + ab * t)
}

/// Length of the component of `p - q` orthogonal to orientation `theta`.
pub fn off_text_distance(p: Point, q: Point, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    ((p.x - q.x) * s - (p.y - q.y) * c).abs()
}

/// Maps any angle onto its axial representative in `(-π/2, π/2]`.
pub fn normalize_axial(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(PI);
    if t > FRAC_PI_2 {
        t -= PI;
    }
    // rem_euclid can return values within an ulp of PI; fold those onto π/2's side.
    if t <= -FRAC_PI_2 {
        t += PI;
    }
    t
}

/// Smallest angle between two axial orientations, in `[0, π/2]`.
pub fn axial_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).abs().rem_euclid(PI);
    d.min(PI - d)
}

/// Axial circular mean: half the argument of `Σ exp(2iθ)`.
///
/// Returns `None` when the doubled-angle vectors cancel exactly.
pub fn axial_mean(thetas: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (mut sx, mut sy) = (0.0, 0.0);
    for t in thetas {
        let (s, c) = (2.0 * t).sin_cos();
        sx += c;
        sy += s;
    }
    if sx.hypot(sy) < 1e-12 {
        return None;
    }
    Some(normalize_axial(0.5 * sy.atan2(sx)))
}

/// Orientation of the line through `q` and `r`, `arctan(Δy/Δx)` with the
/// vertical case mapped to `π/2`.
pub fn line_orientation(q: Point, r: Point) -> f64 {
    let dx = r.x - q.x;
    let dy = r.y - q.y;
    if dx == 0.0 {
        return FRAC_PI_2;
    }
    normalize_axial((dy / dx).atan())
}
