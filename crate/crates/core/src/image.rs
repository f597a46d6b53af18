//! Raster carriers: intensity images in `[0, 1]`, binary masks and the
//! baseline/separator confidence maps produced by a pixel labeler.

use crate::error::{Error, Result};
use crate::geometry::Point;

/// Dense row-major intensity field, every sample in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl GrayImage {
    pub fn new(height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        if height == 0 || width == 0 || data.len() != height * width {
            return Err(Error::BadDimensions { height, width, len: data.len() });
        }
        if let Some((index, &value)) = data
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::IntensityRange { index, value });
        }
        Ok(Self { height, width, data })
    }

    pub fn filled(height: usize, width: usize, value: f32) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        Self { height, width, data: vec![value.clamp(0.0, 1.0); height * width] }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    /// Builds an image from a closure over `(row, col)`, clamping into `[0, 1]`.
    pub fn from_fn(height: usize, width: usize, f: impl Fn(usize, usize) -> f32) -> Self {
        assert!(height > 0 && width > 0, "image dimensions must be positive");
        let mut data = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                let v = f(y, x);
                data.push(if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) });
            }
        }
        Self { height, width, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f32 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f32) {
        self.data[row * self.width + col] = value.clamp(0.0, 1.0);
    }

    pub fn max(&self) -> f32 {
        self.data.iter().copied().fold(0.0, f32::max)
    }
}

/// Intensity of the pixel nearest to `p`: each axis rounds half away from
/// zero, then clamps into the image.
pub fn interp_intensity(img: &GrayImage, p: Point) -> f32 {
    let (row, col) = nearest_pixel(img.height, img.width, p);
    img.get(row, col)
}

#[inline]
pub(crate) fn nearest_pixel(height: usize, width: usize, p: Point) -> (usize, usize) {
    let clamp = |v: f64, n: usize| -> usize {
        let r = v.round();
        if r.is_nan() || r < 0.0 {
            0
        } else {
            (r as usize).min(n - 1)
        }
    };
    (clamp(p.y, height), clamp(p.x, width))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    height: usize,
    width: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(height: usize, width: usize) -> Self {
        Self { height, width, data: vec![false; height * width] }
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<bool>) -> Result<Self> {
        if data.len() != height * width {
            return Err(Error::BadDimensions { height, width, len: data.len() });
        }
        Ok(Self { height, width, data })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        self.data[row * self.width + col] = value;
    }

    /// Sets the pixel if `(row, col)` lies inside the image; signed for
    /// rasterizers that may step outside.
    pub fn set_checked(&mut self, row: i64, col: i64, value: bool) {
        if row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width {
            self.set(row as usize, col as usize, value);
        }
    }

    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    pub fn and_not(&self, other: &BinaryImage) -> BinaryImage {
        debug_assert_eq!(self.dims(), other.dims());
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a && !b).collect();
        BinaryImage { height: self.height, width: self.width, data }
    }

    pub fn or(&self, other: &BinaryImage) -> BinaryImage {
        debug_assert_eq!(self.dims(), other.dims());
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| a || b).collect();
        BinaryImage { height: self.height, width: self.width, data }
    }

    /// Foreground pixels in row-major order as `(row, col)`.
    pub fn foreground(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let w = self.width;
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(i, _)| (i / w, i % w))
    }

    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            height: self.height,
            width: self.width,
            data: self.data.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
        }
    }
}

/// Per-pixel class confidences. `baseline` and `separator` are always
/// present; `other` is carried when the source produced all three classes.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceMaps {
    pub baseline: GrayImage,
    pub separator: GrayImage,
    pub other: Option<GrayImage>,
}

impl ConfidenceMaps {
    pub fn new(baseline: GrayImage, separator: GrayImage, other: Option<GrayImage>) -> Result<Self> {
        if baseline.dims() != separator.dims() {
            return Err(Error::PlaneMismatch(format!(
                "baseline {:?} vs separator {:?}",
                baseline.dims(),
                separator.dims()
            )));
        }
        if let Some(o) = &other {
            if o.dims() != baseline.dims() {
                return Err(Error::PlaneMismatch(format!(
                    "baseline {:?} vs other {:?}",
                    baseline.dims(),
                    o.dims()
                )));
            }
        }
        Ok(Self { baseline, separator, other })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.baseline.dims()
    }

    /// Largest deviation of the per-pixel class sum from 1, when all three
    /// planes are present.
    pub fn class_sum_deviation(&self) -> Option<f64> {
        let other = self.other.as_ref()?;
        let dev = self
            .baseline
            .data()
            .iter()
            .zip(self.separator.data())
            .zip(other.data())
            .map(|((&b, &s), &o)| (b as f64 + s as f64 + o as f64 - 1.0).abs())
            .fold(0.0, f64::max);
        Some(dev)
    }
}
