//! Confidence maps to baselines.

use crate::cluster::{baselines_from_partition, greedy_cluster, reduce_neighborhood, ClusterOutcome};
use crate::config::PipelineConfig;
use crate::error::Result;
use crate::geometry::{Point, PolyChain, Region};
use crate::image::ConfidenceMaps;
use crate::state::{build_neighborhood, estimate_states, NeighborhoodSystem, StateEstimate};
use crate::superpixels::{binarize, select_superpixels, skeletonize, SuperPixel};

/// Everything the detector computed for one page.
#[derive(Debug, Clone)]
pub struct Detection {
    pub baselines: Vec<PolyChain>,
    pub superpixels: Vec<SuperPixel>,
    pub neighborhood: NeighborhoodSystem,
    pub reduced: NeighborhoodSystem,
    pub states: Option<StateEstimate>,
    pub clustering: Option<ClusterOutcome>,
}

impl Detection {
    pub fn positions(&self) -> Vec<Point> {
        self.superpixels.iter().map(|s| s.position).collect()
    }
}

/// Runs superpixel extraction, state estimation and clustering.
///
/// Debug builds audit the clustering and panic on a violation.
///
/// The separator map is used only when `config.use_separators` is set;
/// `regions` may be empty.
pub fn detect_baselines(maps: &ConfidenceMaps, regions: &[Region], config: &PipelineConfig) -> Result<Detection> {
    config.validate()?;
    let bin = binarize(&maps.baseline, config.bin_threshold);
    let skel = skeletonize(&bin);
    let superpixels = select_superpixels(&skel, &maps.baseline, config.min_sp_distance);
    let positions: Vec<Point> = superpixels.iter().map(|s| s.position).collect();
    if positions.is_empty() {
        return Ok(Detection {
            baselines: Vec::new(),
            superpixels,
            neighborhood: NeighborhoodSystem::default(),
            reduced: NeighborhoodSystem::default(),
            states: None,
            clustering: None,
        });
    }
    let neighborhood = build_neighborhood(&positions);
    let est = estimate_states(&positions, &neighborhood, &maps.baseline, config)?;
    let separator = config.use_separators.then_some(&maps.separator);
    let reduced = reduce_neighborhood(
        &neighborhood,
        &positions,
        &est.states,
        separator,
        regions,
        config.eta,
        config.connectivity,
    );
    let outcome = greedy_cluster(&positions, &est.states, &reduced, &maps.baseline, config);
    #[cfg(debug_assertions)]
    {
        // debug builds re-check every clustering with the independent auditor
        let report = crate::audit::audit_partition(&outcome.partition, &positions, &est.states, &reduced, config);
        assert!(report.is_feasible(), "infeasible clustering: {:?}", report.violations);
        let moves = crate::audit::audit_moves(&outcome, &positions, &reduced, &maps.baseline, config);
        assert!(moves.is_empty(), "inconsistent move log: {moves:?}");
    }
    let baselines = baselines_from_partition(&outcome.partition, &positions, &est.states, config);
    Ok(Detection {
        baselines,
        superpixels,
        neighborhood,
        reduced,
        states: Some(est),
        clustering: Some(outcome),
    })
}
