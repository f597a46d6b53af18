use crate::error::{NplError, Result};

/// Feature maps of shape `height × width × depth`, stored row-major with the
/// channel index varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    height: usize,
    width: usize,
    depth: usize,
    data: Vec<f32>,
}

impl Tensor3 {
    pub fn new(height: usize, width: usize, depth: usize, data: Vec<f32>) -> Result<Self> {
        if data.len() != height * width * depth {
            return Err(NplError::Shape(format!(
                "{height}x{width}x{depth} needs {} values, got {}",
                height * width * depth,
                data.len()
            )));
        }
        Ok(Self { height, width, depth, data })
    }

    pub fn zeros(height: usize, width: usize, depth: usize) -> Self {
        Self { height, width, depth, data: vec![0.0; height * width * depth] }
    }

    pub fn from_fn(height: usize, width: usize, depth: usize, f: impl Fn(usize, usize, usize) -> f32) -> Self {
        let mut data = Vec::with_capacity(height * width * depth);
        for y in 0..height {
            for x in 0..width {
                for c in 0..depth {
                    data.push(f(y, x, c));
                }
            }
        }
        Self { height, width, depth, data }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f32> {
        self.data
    }

    pub fn get(&self, y: usize, x: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.depth + c]
    }

    pub fn set(&mut self, y: usize, x: usize, c: usize, v: f32) {
        self.data[(y * self.width + x) * self.depth + c] = v;
    }

    /// The channel vector at one pixel.
    pub fn pixel(&self, y: usize, x: usize) -> &[f32] {
        let i = (y * self.width + x) * self.depth;
        &self.data[i..i + self.depth]
    }

    /// One channel as a single-channel tensor.
    pub fn channel(&self, c: usize) -> Tensor3 {
        assert!(c < self.depth, "channel {c} of {}", self.depth);
        let data = self.data.iter().skip(c).step_by(self.depth).copied().collect();
        Tensor3 { height: self.height, width: self.width, depth: 1, data }
    }

    /// Channel-wise concatenation of two tensors with equal spatial dims.
    pub fn concat(&self, other: &Tensor3) -> Result<Tensor3> {
        if self.dims() != other.dims() {
            return Err(NplError::Shape(format!("concat {:?} with {:?}", self.dims(), other.dims())));
        }
        let depth = self.depth + other.depth;
        let mut data = Vec::with_capacity(self.height * self.width * depth);
        for (a, b) in self.data.chunks_exact(self.depth.max(1)).zip(other.data.chunks_exact(other.depth.max(1))) {
            data.extend_from_slice(&a[..self.depth]);
            data.extend_from_slice(&b[..other.depth]);
        }
        Ok(Tensor3 { height: self.height, width: self.width, depth, data })
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}
