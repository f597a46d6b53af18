//! Superpixel states: local text orientation and interline distance.

mod connectivity;
mod graphcut;
mod labels;
mod neighborhood;
mod orientation;
mod spectrum;

pub use connectivity::{connectivity, max_along, segment_samples};
pub use graphcut::{greedy_labeling, labeling_cost, minimize_labeling};
pub use labels::{smoothing_cost, smoothing_cost_index, InterlineLabelSet, Label};
pub use neighborhood::{build_neighborhood, NeighborhoodSystem};
pub use orientation::local_text_orientation;
pub use spectrum::{data_costs_from_profiles, fft, projection_profile, spectral_energies};

use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::error::Result;
use crate::geometry::Point;
use crate::image::GrayImage;
use crate::spatial::PointGrid;

/// State `(θ, s)` of a superpixel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpState {
    /// Local text orientation in `(−π/2, π/2]`.
    pub theta: f64,
    /// Interline distance, one of the label values.
    pub interline: f64,
}

/// Output of [`estimate_states`].
#[derive(Debug, Clone)]
pub struct StateEstimate {
    pub states: Vec<SpState>,
    /// Superpixels without any neighbor (their orientation defaults to 0).
    pub isolated: Vec<bool>,
    /// Chosen label index per superpixel.
    pub label_index: Vec<usize>,
    /// Data cost per superpixel and label.
    pub data_costs: Vec<Vec<f64>>,
}

/// Data costs of superpixel `p` for every label of `labels`.
pub fn data_costs(p: usize, positions: &[Point], theta: f64, labels: &InterlineLabelSet, cap: f64) -> Vec<f64> {
    data_costs_from_profiles(labels, |d| projection_profile(positions[p], d, theta, positions, None), cap)
}

/// Estimates orientation and interline distance for every superpixel.
pub fn estimate_states(
    positions: &[Point],
    neighborhood: &NeighborhoodSystem,
    baseline: &GrayImage,
    config: &PipelineConfig,
) -> Result<StateEstimate> {
    let labels = InterlineLabelSet::new(&config.diameters, &config.harmonics)?;
    let (theta, isolated): (Vec<f64>, Vec<bool>) = (0..positions.len())
        .map(|p| local_text_orientation(p, positions, neighborhood, baseline, config.connectivity, config.bin_threshold))
        .unzip();

    let max_d = config.diameters.iter().copied().max().unwrap_or(0) as f64;
    let grid = PointGrid::new(positions, (max_d / 2.0).max(1.0));
    let data: Vec<Vec<f64>> = (0..positions.len())
        .map(|p| {
            let near = grid.within(positions, positions[p], max_d / 2.0);
            data_costs_from_profiles(
                &labels,
                |d| projection_profile(positions[p], d, theta[p], positions, Some(&near)),
                config.data_cost_cap,
            )
        })
        .collect();

    let label_index = minimize_labeling(&data, neighborhood, config.alpha, config.beta, config.sigma);
    let states = theta
        .iter()
        .zip(&label_index)
        .map(|(&theta, &l)| SpState { theta, interline: labels.value(l) })
        .collect();
    Ok(StateEstimate { states, isolated, label_index, data_costs: data })
}
