use crate::config::ConnectivityMode;
use crate::geometry::{line_orientation, Point};
use crate::image::GrayImage;

use super::connectivity::connectivity;
use super::neighborhood::NeighborhoodSystem;

/// Local text orientation of superpixel `p`.
///
/// Incident edges are ranked by their connectivity in `baseline`. Only
/// baseline-connected edges (connectivity above `min_connectivity`) take
/// part; when there are none, all incident edges do. With a single edge the
/// orientation is that of the edge itself; otherwise it is the orientation
/// of the line through the far endpoints of the two best edges. Returns
/// `(θ, isolated)`; an isolated superpixel gets `θ = 0`.
pub fn local_text_orientation(
    p: usize,
    positions: &[Point],
    neighborhood: &NeighborhoodSystem,
    baseline: &GrayImage,
    mode: ConnectivityMode,
    min_connectivity: f64,
) -> (f64, bool) {
    let nbrs = neighborhood.neighbors(p);
    if nbrs.is_empty() {
        return (0.0, true);
    }
    let pp = positions[p];
    let mut ranked: Vec<(f64, usize)> = nbrs
        .iter()
        .map(|&q| (connectivity(pp, positions[q], baseline, mode), q))
        .collect();
    // highest connectivity first, lower index on ties
    ranked.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let connected = ranked.iter().filter(|e| e.0 > min_connectivity).count();
    if connected > 0 {
        ranked.truncate(connected);
    }
    let (q, r) = if ranked.len() == 1 {
        (pp, positions[ranked[0].1])
    } else {
        (positions[ranked[0].1], positions[ranked[1].1])
    };
    if q == r {
        // both far endpoints at one position: fall back to the best edge
        return (line_orientation(pp, positions[ranked[0].1]), false);
    }
    (line_orientation(q, r), false)
}
