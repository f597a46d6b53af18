use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SynthPage;
use crate::error::Result;
use crate::geometry::{Point, PolyChain, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeformKind {
    /// Three page corners shift randomly inside a disc of diameter
    /// `magnitude · max(H, W)`; the affine map through them is applied.
    Affine,
    /// Smoothed random displacement field with peak displacement `magnitude` px.
    Elastic,
    /// Rigid rotation by `magnitude` radians about the image center.
    Rotation,
}

/// `p ↦ A·p + t` stored row-major as `[a, b, tx; c, d, ty]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine(pub [[f64; 3]; 2]);

impl Affine {
    pub fn apply(&self, p: Point) -> Point {
        let m = &self.0;
        Point::new(
            m[0][0] * p.x + m[0][1] * p.y + m[0][2],
            m[1][0] * p.x + m[1][1] * p.y + m[1][2],
        )
    }
}

/// The affine map sending each `src[i]` to `dst[i]` (Cramer's rule on the
/// 3×3 system shared by both output rows). `None` for collinear sources.
pub fn affine_from_corners(src: [Point; 3], dst: [Point; 3]) -> Option<Affine> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let base = [
        [src[0].x, src[0].y, 1.0],
        [src[1].x, src[1].y, 1.0],
        [src[2].x, src[2].y, 1.0],
    ];
    let d = det(base);
    if d.abs() < 1e-12 {
        return None;
    }
    let solve_row = |rhs: [f64; 3]| {
        let mut out = [0.0; 3];
        for (col, o) in out.iter_mut().enumerate() {
            let mut m = base;
            for r in 0..3 {
                m[r][col] = rhs[r];
            }
            *o = det(m) / d;
        }
        out
    };
    Some(Affine([
        solve_row([dst[0].x, dst[1].x, dst[2].x]),
        solve_row([dst[0].y, dst[1].y, dst[2].y]),
    ]))
}

/// Moves every baseline and region point through one random field. Point
/// counts and order are preserved; the canvas is not resized.
pub fn deform(page: &SynthPage, kind: DeformKind, magnitude: f64, seed: u64) -> Result<SynthPage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (page.width as f64, page.height as f64);
    let field: Box<dyn Fn(Point) -> Point> = match kind {
        DeformKind::Affine => {
            let radius = 0.5 * magnitude * w.max(h);
            let src = [Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(0.0, h)];
            let mut dst = src;
            for d in &mut dst {
                // uniform in the disc
                let r = radius * rng.random::<f64>().sqrt();
                let a = rng.random_range(0.0..std::f64::consts::TAU);
                *d = *d + Point::new(r * a.cos(), r * a.sin());
            }
            let map = affine_from_corners(src, dst).expect("page corners are not collinear");
            Box::new(move |p| map.apply(p))
        }
        DeformKind::Rotation => {
            let center = Point::new(w / 2.0, h / 2.0);
            Box::new(move |p| p.rotate_about(center, magnitude))
        }
        DeformKind::Elastic => {
            let grid = DisplacementGrid::random(page.width, page.height, magnitude, &mut rng);
            Box::new(move |p| p + grid.sample(p))
        }
    };
    let baselines = page
        .baselines
        .iter()
        .map(|c| PolyChain::new(c.points().iter().map(|&p| field(p)).collect()))
        .collect::<Result<Vec<_>>>()?;
    let regions = page
        .regions
        .iter()
        .map(|r| Region::new(r.boundary().iter().map(|&p| field(p)).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok(SynthPage { baselines, regions, ..page.clone() })
}

/// Coarse grid of random displacements, gaussian-smoothed and scaled so the
/// largest displacement component equals `magnitude`.
struct DisplacementGrid {
    cell: f64,
    nx: usize,
    ny: usize,
    dx: Vec<f64>,
    dy: Vec<f64>,
}

impl DisplacementGrid {
    const CELL: f64 = 16.0;
    const SMOOTH_CELLS: f64 = 2.0;

    fn random(width: usize, height: usize, magnitude: f64, rng: &mut ChaCha8Rng) -> Self {
        let nx = (width as f64 / Self::CELL).ceil() as usize + 2;
        let ny = (height as f64 / Self::CELL).ceil() as usize + 2;
        let mut noise = |_| rng.random_range(-1.0..1.0);
        let raw_x: Vec<f64> = (0..nx * ny).map(&mut noise).collect();
        let raw_y: Vec<f64> = (0..nx * ny).map(&mut noise).collect();
        let mut dx = smooth(&raw_x, nx, ny, Self::SMOOTH_CELLS);
        let mut dy = smooth(&raw_y, nx, ny, Self::SMOOTH_CELLS);
        let peak = dx.iter().chain(&dy).fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = if peak > 0.0 { magnitude / peak } else { 0.0 };
        dx.iter_mut().chain(dy.iter_mut()).for_each(|v| *v *= scale);
        Self { cell: Self::CELL, nx, ny, dx, dy }
    }

    fn sample(&self, p: Point) -> Point {
        let gx = (p.x / self.cell).clamp(0.0, (self.nx - 1) as f64);
        let gy = (p.y / self.cell).clamp(0.0, (self.ny - 1) as f64);
        let (x0, y0) = (gx.floor() as usize, gy.floor() as usize);
        let (x1, y1) = ((x0 + 1).min(self.nx - 1), (y0 + 1).min(self.ny - 1));
        let (fx, fy) = (gx - x0 as f64, gy - y0 as f64);
        let lerp = |f: &[f64]| {
            let at = |x: usize, y: usize| f[y * self.nx + x];
            let top = at(x0, y0) * (1.0 - fx) + at(x1, y0) * fx;
            let bot = at(x0, y1) * (1.0 - fx) + at(x1, y1) * fx;
            top * (1.0 - fy) + bot * fy
        };
        Point::new(lerp(&self.dx), lerp(&self.dy))
    }
}

fn smooth(field: &[f64], nx: usize, ny: usize, sigma: f64) -> Vec<f64> {
    let kernel = super::render::gaussian_kernel(sigma);
    let r = kernel.len() / 2;
    let blur = |src: &[f64], horizontal: bool| {
        let mut out = vec![0.0; src.len()];
        for y in 0..ny {
            for x in 0..nx {
                let mut acc = 0.0;
                for (k, w) in kernel.iter().enumerate() {
                    let off = k as i64 - r as i64;
                    let (xx, yy) = if horizontal {
                        ((x as i64 + off).clamp(0, nx as i64 - 1) as usize, y)
                    } else {
                        (x, (y as i64 + off).clamp(0, ny as i64 - 1) as usize)
                    };
                    acc += *w as f64 * src[yy * nx + xx];
                }
                out[y * nx + x] = acc;
            }
        }
        out
    };
    blur(&blur(field, true), false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groundtruth::{synth_page, SynthStyle};

    #[test]
    fn zero_magnitude_is_identity() {
        let page = synth_page(4, SynthStyle::Curved);
        for kind in [DeformKind::Affine, DeformKind::Elastic, DeformKind::Rotation] {
            let out = deform(&page, kind, 0.0, 99).unwrap();
            for (a, b) in page.baselines.iter().zip(&out.baselines) {
                for (p, q) in a.points().iter().zip(b.points()) {
                    assert!(p.dist(*q) < 1e-9, "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn half_turn_is_central_symmetry() {
        let page = synth_page(5, SynthStyle::Straight);
        let out = deform(&page, DeformKind::Rotation, std::f64::consts::PI, 0).unwrap();
        let (w, h) = (page.width as f64, page.height as f64);
        for (a, b) in page.baselines.iter().zip(&out.baselines) {
            for (p, q) in a.points().iter().zip(b.points()) {
                assert!((q.x - (w - p.x)).abs() < 1e-9 && (q.y - (h - p.y)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn affine_solve_matches_closed_form() {
        // Known map: x' = 1.02x + 0.01y + 3, y' = -0.015x + 0.99y - 2
        let truth = |p: Point| Point::new(1.02 * p.x + 0.01 * p.y + 3.0, -0.015 * p.x + 0.99 * p.y - 2.0);
        let src = [Point::new(0.0, 0.0), Point::new(600.0, 0.0), Point::new(0.0, 800.0)];
        let map = affine_from_corners(src, src.map(truth)).unwrap();
        let expected = [[1.02, 0.01, 3.0], [-0.015, 0.99, -2.0]];
        for (row, want) in map.0.iter().zip(&expected) {
            for (v, w) in row.iter().zip(want) {
                assert!((v - w).abs() < 1e-12);
            }
        }
        let p = Point::new(123.0, 456.0);
        assert!(map.apply(p).dist(truth(p)) < 1e-9);
    }

    #[test]
    fn deformations_preserve_counts_and_bound_elastic_shift() {
        let page = synth_page(6, SynthStyle::Straight);
        for kind in [DeformKind::Affine, DeformKind::Elastic] {
            let mag = if kind == DeformKind::Affine { 0.025 } else { 4.0 };
            let out = deform(&page, kind, mag, 1).unwrap();
            assert_eq!(out.baselines.len(), page.baselines.len());
            for (a, b) in page.baselines.iter().zip(&out.baselines) {
                assert_eq!(a.len(), b.len());
                if kind == DeformKind::Elastic {
                    for (p, q) in a.points().iter().zip(b.points()) {
                        assert!((p.x - q.x).abs() <= 4.0 + 1e-9 && (p.y - q.y).abs() <= 4.0 + 1e-9);
                    }
                }
            }
        }
        assert_eq!(deform(&page, DeformKind::Elastic, 3.0, 5), deform(&page, DeformKind::Elastic, 3.0, 5));
    }
}
