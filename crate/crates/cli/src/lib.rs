//! Command-line front end: baseline detection from confidence maps or
//! images, network inference, pixel ground truth, synthetic pages and
//! evaluation.

pub mod commands;
pub mod error;
pub mod formats;

pub use commands::{run, Cli};
pub use error::{CliError, Result};
