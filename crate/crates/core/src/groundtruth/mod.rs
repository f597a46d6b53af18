//! Pixel ground truth from baseline annotations, plus the synthetic page
//! generator, page deformations and oracle confidence maps used to exercise
//! the pipeline without a trained network.

mod deform;
mod render;
mod synth;

pub use deform::{affine_from_corners, deform, Affine, DeformKind};
pub use render::render_oracle_maps;
pub use synth::{rotate_page, synth_corpus, synth_page, SynthPage, SynthStyle};

use crate::geometry::{Point, PolyChain};
use crate::image::BinaryImage;
use crate::morphology::dilate;

/// Interline distance used for a chain that has no other chain across its
/// normal.
pub const DEFAULT_INTERLINE: f64 = 64.0;

/// One-hot pixel classes: baseline, separator, other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelGT {
    pub baseline: BinaryImage,
    pub separator: BinaryImage,
    pub other: BinaryImage,
}

impl PixelGT {
    pub fn dims(&self) -> (usize, usize) {
        self.baseline.dims()
    }

    /// True iff exactly one plane is set at every pixel.
    pub fn is_partition(&self) -> bool {
        self.baseline.dims() == self.separator.dims()
            && self.baseline.dims() == self.other.dims()
            && self
                .baseline
                .data()
                .iter()
                .zip(self.separator.data())
                .zip(self.other.data())
                .all(|((&b, &s), &o)| b as u8 + s as u8 + o as u8 == 1)
    }

    /// Class index per pixel: 0 baseline, 1 separator, 2 other.
    pub fn class_at(&self, row: usize, col: usize) -> usize {
        if self.baseline.get(row, col) {
            0
        } else if self.separator.get(row, col) {
            1
        } else {
            2
        }
    }
}

/// Distance from chain `index` to the nearest other chain, measured along the
/// local normal of `index`'s segments. Every 1-px sample of the chain casts
/// its normal line; the smallest distance at which that line meets another
/// chain wins. Returns `default` when no normal meets another chain.
pub fn chain_interline_distance(index: usize, all: &[PolyChain], default: f64) -> f64 {
    let chain = &all[index];
    let mut best = f64::INFINITY;
    for (s, dir) in chain.resample(1.0) {
        let normal = Point::new(-dir.y, dir.x);
        for (j, other) in all.iter().enumerate() {
            if j == index {
                continue;
            }
            for (a, b) in other.segments() {
                if let Some(t) = normal_hit(s, normal, a, b) {
                    best = best.min(t.abs());
                }
            }
        }
    }
    if best.is_finite() && best > 0.0 {
        best
    } else {
        default
    }
}

/// Signed parameter `t` with `s + t·n` on segment `[a, b]`, if any.
fn normal_hit(s: Point, n: Point, a: Point, b: Point) -> Option<f64> {
    let ab = b - a;
    let denom = n.cross(ab);
    if denom.abs() < 1e-12 {
        return None;
    }
    let as_ = a - s;
    let t = as_.cross(ab) / denom;
    let u = as_.cross(n) / denom;
    (-1e-9..=1.0 + 1e-9).contains(&u).then_some(t)
}

/// Sets every pixel on the integer line between the rounded endpoints.
pub fn draw_segment(img: &mut BinaryImage, a: Point, b: Point) {
    let (mut x0, mut y0) = (a.x.round() as i64, a.y.round() as i64);
    let (x1, y1) = (b.x.round() as i64, b.y.round() as i64);
    let dx = (x1 - x0).abs();
    let dy = -(y1 - y0).abs();
    let sx = if x0 < x1 { 1 } else { -1 };
    let sy = if y0 < y1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        img.set_checked(y0, x0, true);
        if x0 == x1 && y0 == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x0 += sx;
        }
        if e2 <= dx {
            err += dx;
            y0 += sy;
        }
    }
}

pub fn draw_chain(img: &mut BinaryImage, chain: &PolyChain) {
    for (a, b) in chain.segments() {
        draw_segment(img, a, b);
    }
}

/// The two end strokes of a chain: segments of length `d`, orthogonal to the
/// adjacent chain segment and centered on the first and last point.
pub fn separator_strokes(chain: &PolyChain, d: f64) -> [(Point, Point); 2] {
    let pts = chain.points();
    let n = pts.len();
    let stroke = |center: Point, from: Point, to: Point| {
        let dir = (to - from) * (1.0 / to.dist(from));
        let normal = Point::new(-dir.y, dir.x) * (0.5 * d);
        (center - normal, center + normal)
    };
    [stroke(pts[0], pts[0], pts[1]), stroke(pts[n - 1], pts[n - 2], pts[n - 1])]
}

/// Pixel ground truth: chains go to the baseline plane, their end strokes to
/// the separator plane; both are dilated by a 3×3 square, with separator
/// pixels taking precedence.
pub fn generate_pixel_gt(
    height: usize,
    width: usize,
    chains: &[PolyChain],
    default_interline: f64,
) -> PixelGT {
    let mut b = BinaryImage::new(height, width);
    let mut s = BinaryImage::new(height, width);
    for (i, chain) in chains.iter().enumerate() {
        let d = chain_interline_distance(i, chains, default_interline);
        for (p, q) in separator_strokes(chain, d) {
            draw_segment(&mut s, p, q);
        }
        draw_chain(&mut b, chain);
    }
    let separator = dilate(&s);
    let baseline = dilate(&b).and_not(&separator);
    let other = BinaryImage::from_vec(
        height,
        width,
        baseline
            .data()
            .iter()
            .zip(separator.data())
            .map(|(&b, &s)| !b && !s)
            .collect(),
    )
    .expect("same dims");
    PixelGT { baseline, separator, other }
}
