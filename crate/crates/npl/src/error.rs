use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NplError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("missing weight `{0}`")]
    MissingWeight(String),
    #[error("weight `{name}` has shape {got:?}, expected {expected:?}")]
    WeightShape { name: String, expected: Vec<usize>, got: Vec<usize> },
    #[error("input {height}x{width} is smaller than the minimum side {min}")]
    TooSmall { height: usize, width: usize, min: usize },
    #[error("empty image")]
    EmptyImage,
    #[error("bad magic: expected {expected:?}")]
    BadMagic { expected: &'static str },
    #[error("truncated payload: needed {needed} bytes at offset {offset}, {available} available")]
    Truncated { offset: usize, needed: usize, available: usize },
    #[error("duplicate tensor name `{0}`")]
    DuplicateName(String),
    #[error("tensor name is not valid UTF-8")]
    BadName,
    #[error("{0} trailing bytes after the last tensor")]
    TrailingBytes(usize),
    #[error("{0}")]
    Core(#[from] baseline_core::Error),
}

pub type Result<T> = std::result::Result<T, NplError>;
