use std::f64::consts::{FRAC_PI_4, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Point, PolyChain, Region};

/// Smallest and largest interline spacing drawn for synthetic pages.
pub const SPACING_RANGE: (f64, f64) = (12.8, 170.7);

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthStyle {
    /// Horizontal lines.
    Straight,
    /// Lines warped by one sinusoid shared across the page.
    Curved,
    /// Straight page rotated by a uniform angle in `[-45°, 45°]`.
    Rotated,
    /// Straight page rotated by exactly this angle (radians).
    RotatedBy(f64),
    /// Each page picks straight, curved or rotated at random.
    Mixed,
}

/// A synthetic page: canvas size, baselines, optional text regions and the
/// seed that reproduces it.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthPage {
    pub width: usize,
    pub height: usize,
    pub baselines: Vec<PolyChain>,
    pub regions: Vec<Region>,
    pub seed: u64,
    /// Nominal spacing between consecutive lines before any warp.
    pub spacing: f64,
}

impl SynthPage {
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }
}

/// `n_pages` pages, each seeded from a stream derived from `seed`.
pub fn synth_corpus(n_pages: usize, seed: u64, style: SynthStyle) -> Vec<SynthPage> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n_pages.max(1)).map(|_| synth_page(rng.random(), style)).collect()
}

pub fn synth_page(seed: u64, style: SynthStyle) -> SynthPage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let style = match style {
        SynthStyle::Mixed => match rng.random_range(0..3) {
            0 => SynthStyle::Straight,
            1 => SynthStyle::Curved,
            _ => SynthStyle::Rotated,
        },
        s => s,
    };
    // log-uniform so small and large spacings are equally represented
    let (lo, hi) = SPACING_RANGE;
    let spacing = (rng.random_range(lo.ln()..hi.ln())).exp();
    let n_lines = ((900.0 / spacing).round() as usize).clamp(5, 30);
    let margin_y = (0.75 * spacing + 30.0).round();
    let width = rng.random_range(400..900usize);
    let height = (2.0 * margin_y + (n_lines - 1) as f64 * spacing).ceil() as usize + 1;
    let margin_x = 30.0;

    let warp = match style {
        SynthStyle::Curved => Some((
            rng.random_range(0.2..0.5) * spacing,
            rng.random_range(1.5..3.0) * width as f64,
            rng.random_range(0.0..TAU),
        )),
        _ => None,
    };

    let mut baselines = Vec::with_capacity(n_lines);
    for i in 0..n_lines {
        let y0 = margin_y + i as f64 * spacing;
        let x0 = margin_x + rng.random_range(0.0..0.15) * width as f64;
        let x1 = width as f64 - margin_x - rng.random_range(0.0..0.25) * width as f64;
        let steps = ((x1 - x0) / 16.0).ceil().max(1.0) as usize;
        let pts = (0..=steps)
            .map(|j| {
                let x = x0 + (x1 - x0) * j as f64 / steps as f64;
                let y = match warp {
                    Some((amp, period, phase)) => y0 + amp * (TAU * x / period + phase).sin(),
                    None => y0,
                };
                Point::new(x, y)
            })
            .collect();
        baselines.push(PolyChain::new(pts).expect("strictly increasing x"));
    }
    let regions = vec![Region::rect(
        margin_x / 2.0,
        margin_y / 2.0,
        width as f64 - margin_x / 2.0,
        height as f64 - margin_y / 2.0,
    )];
    let page = SynthPage { width, height, baselines, regions, seed, spacing };
    match style {
        SynthStyle::Rotated => {
            let angle = rng.random_range(-FRAC_PI_4..=FRAC_PI_4);
            rotate_page(&page, angle)
        }
        SynthStyle::RotatedBy(angle) => rotate_page(&page, angle),
        _ => page,
    }
}

/// Rotates a page about its center by `angle` and grows the canvas so the
/// whole rotated page fits.
pub fn rotate_page(page: &SynthPage, angle: f64) -> SynthPage {
    let (w, h) = (page.width as f64, page.height as f64);
    let center = Point::new(w / 2.0, h / 2.0);
    let corners = [Point::new(0.0, 0.0), Point::new(w, 0.0), Point::new(w, h), Point::new(0.0, h)]
        .map(|p| p.rotate_about(center, angle));
    let min_x = corners.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let min_y = corners.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let max_x = corners.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let max_y = corners.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max);
    // Snap the shift and canvas to whole pixels so quarter turns stay exact.
    let shift = Point::new(-(min_x - 1e-9).floor(), -(min_y - 1e-9).floor());
    let width = ((max_x + shift.x) - 1e-9).ceil().max(1.0) as usize;
    let height = ((max_y + shift.y) - 1e-9).ceil().max(1.0) as usize;
    let map = |p: Point| {
        let r = p.rotate_about(center, angle) + shift;
        Point::new(snap(r.x), snap(r.y))
    };
    SynthPage {
        width,
        height,
        baselines: page
            .baselines
            .iter()
            .map(|c| c.map_points(map).expect("rotation keeps points distinct"))
            .collect(),
        regions: page
            .regions
            .iter()
            .map(|r| Region::new(r.boundary().iter().map(|&p| map(p)).collect()).expect("valid"))
            .collect(),
        seed: page.seed,
        spacing: page.spacing,
    }
}

/// Removes floating-point dust left by trigonometric rotation.
fn snap(v: f64) -> f64 {
    let r = (v * 1e9).round() / 1e9;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}
