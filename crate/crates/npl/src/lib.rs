//! Forward-only pixel labelers for baseline detection.
//!
//! A U-Net, its residual variant (RU-Net) and the attention-weighted
//! multi-scale ARU-Net map a grayscale image to per-pixel probabilities of
//! the classes baseline, separator and other. Weights are loaded from (or
//! saved to) the `ARUW` format; there is no training code.

pub mod arch;
pub mod error;
pub mod loss;
pub mod net;
pub mod ops;
pub mod preprocess;
pub mod tensor;
pub mod weights;

pub use arch::{count_parameters, NplArchitecture, Variant};
pub use error::{NplError, Result};
pub use loss::cross_entropy_loss;
pub use net::{attention_softmax, blend, Npl, NplOutput};
pub use preprocess::{preprocess, scale_factor, Preprocessed};
pub use tensor::Tensor3;
pub use weights::{Param, WeightStore};
