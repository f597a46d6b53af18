use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{generate_pixel_gt, SynthPage, DEFAULT_INTERLINE};
use crate::image::{BinaryImage, ConfidenceMaps, GrayImage};

/// Normalized 1-D gaussian with radius `ceil(3σ)`; `[1]` for `σ = 0`.
pub(crate) fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    if sigma <= 0.0 {
        return vec![1.0];
    }
    let r = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|v| (v / sum) as f32).collect()
}

fn blur(plane: &BinaryImage, kernel: &[f32]) -> Vec<f32> {
    let (h, w) = plane.dims();
    let r = (kernel.len() / 2) as i64;
    let src: Vec<f32> = plane.data().iter().map(|&b| b as u8 as f32).collect();
    let mut tmp = vec![0.0f32; h * w];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, wgt) in kernel.iter().enumerate() {
                let xx = x as i64 + k as i64 - r;
                if xx >= 0 && xx < w as i64 {
                    acc += wgt * src[y * w + xx as usize];
                }
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f32; h * w];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0;
            for (k, wgt) in kernel.iter().enumerate() {
                let yy = y as i64 + k as i64 - r;
                if yy >= 0 && yy < h as i64 {
                    acc += wgt * tmp[yy as usize * w + x];
                }
            }
            out[y * w + x] = acc;
        }
    }
    out
}

/// Stand-in for a trained labeler: the ground-truth baseline and separator
/// planes, gaussian-blurred, rescaled so the center of a 3-px band keeps
/// full confidence, then perturbed by uniform noise in `[-noise, noise]` and
/// clamped to `[0, 1]`.
pub fn render_oracle_maps(page: &SynthPage, blur_sigma: f64, noise_amp: f64, seed: u64) -> ConfidenceMaps {
    let gt = generate_pixel_gt(page.height, page.width, &page.baselines, DEFAULT_INTERLINE);
    let kernel = gaussian_kernel(blur_sigma);
    let c = kernel.len() / 2;
    // 2-D response at the center of an infinitely long 3-px band
    let band_gain: f32 = kernel[c.saturating_sub(1)..(c + 2).min(kernel.len())].iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plane = |bin: &BinaryImage| {
        let data: Vec<f32> = blur(bin, &kernel)
            .into_iter()
            .map(|v| {
                let n = if noise_amp > 0.0 {
                    rng.random_range(-noise_amp..=noise_amp) as f32
                } else {
                    0.0
                };
                (v / band_gain + n).clamp(0.0, 1.0)
            })
            .collect();
        GrayImage::new(page.height, page.width, data).expect("clamped into range")
    };
    let baseline = plane(&gt.baseline);
    let separator = plane(&gt.separator);
    ConfidenceMaps::new(baseline, separator, None).expect("same dims")
}
