use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("polygonal chain needs at least {min} points, got {got}")]
    TooFewPoints { min: usize, got: usize },
    #[error("consecutive chain points {index} and {} coincide", index + 1)]
    RepeatedPoint { index: usize },
    #[error("non-finite coordinate at point {index}")]
    NonFinite { index: usize },
    #[error("image dimensions {height}x{width} invalid for {len} samples")]
    BadDimensions { height: usize, width: usize, len: usize },
    #[error("intensity {value} at index {index} outside [0, 1]")]
    IntensityRange { index: usize, value: f32 },
    #[error("plane dimensions differ: {0}")]
    PlaneMismatch(String),
    #[error("unknown interline label {0}")]
    UnknownLabel(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
