use baseline_core::GrayImage;

use crate::error::{NplError, Result};
use crate::tensor::Tensor3;

/// A network-ready input: the downscaled, standardized image and the
/// factor it was downscaled by.
#[derive(Debug, Clone, PartialEq)]
pub struct Preprocessed {
    pub input: Tensor3,
    pub factor: usize,
    /// Set when the image had (numerically) zero variance.
    pub degenerate: bool,
}

/// Downscaling factor by the longer image side: 2 below 2000 px, 3 below
/// 4800 px, 4 otherwise.
pub fn scale_factor(height: usize, width: usize) -> usize {
    match height.max(width) {
        m if m < 2000 => 2,
        m if m < 4800 => 3,
        _ => 4,
    }
}

/// Box-averages `factor × factor` blocks (partial blocks at the border
/// average the pixels they hold) and standardizes to mean 0, variance 1.
pub fn preprocess(img: &GrayImage) -> Result<Preprocessed> {
    let (h, w) = img.dims();
    if h == 0 || w == 0 {
        return Err(NplError::EmptyImage);
    }
    let factor = scale_factor(h, w);
    let (oh, ow) = (h.div_ceil(factor), w.div_ceil(factor));
    let mut sums = vec![0.0f64; oh * ow];
    let mut counts = vec![0u32; oh * ow];
    for y in 0..h {
        for x in 0..w {
            let i = (y / factor) * ow + x / factor;
            sums[i] += img.get(y, x) as f64;
            counts[i] += 1;
        }
    }
    let small: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let n = small.len() as f64;
    let mean = small.iter().sum::<f64>() / n;
    let var = small.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    let degenerate = std < 1e-8;
    let data = small.iter().map(|v| ((v - mean) / std.max(1e-8)) as f32).collect();
    Ok(Preprocessed { input: Tensor3::new(oh, ow, 1, data)?, factor, degenerate })
}
