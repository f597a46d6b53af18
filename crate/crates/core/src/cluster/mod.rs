//! Superpixel clustering into baselines.

mod greedy;
mod regression;

pub use greedy::{greedy_cluster, ClusterOutcome, Move, MoveKind};
pub use regression::{
    cluster_statistics, curvilinearity, project_to_curve, regression_curve, rotate_into, unrotate, Projected,
    RegressionCurve,
};

use serde::Serialize;

use crate::config::{ConnectivityMode, PipelineConfig};
use crate::geometry::{axial_difference, axial_mean, off_text_distance, Point, PolyChain, Region};
use crate::image::GrayImage;
use crate::state::{connectivity, max_along, NeighborhoodSystem, SpState};

/// Clutter set plus baseline clusters over superpixel indices.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Partition {
    pub clutter: Vec<usize>,
    pub clusters: Vec<Vec<usize>>,
}

impl Partition {
    /// Cluster id per superpixel, 0 for clutter and `i + 1` for `clusters[i]`.
    pub fn assignment(&self, n: usize) -> Vec<usize> {
        let mut a = vec![0; n];
        for (i, c) in self.clusters.iter().enumerate() {
            for &p in c {
                a[p] = i + 1;
            }
        }
        a
    }
}

/// Orientation of the edge pair `{p, q}`: the axial mean of both states.
pub fn pair_orientation(a: SpState, b: SpState) -> f64 {
    axial_mean([a.theta, b.theta]).unwrap_or(a.theta)
}

/// Removes edges whose endpoints disagree in orientation by more than π/4
/// (axially), edges crossing the separator map, and, when regions are
/// given, edges not contained in a single region.
#[allow(clippy::too_many_arguments)]
pub fn reduce_neighborhood(
    neighborhood: &NeighborhoodSystem,
    positions: &[Point],
    states: &[SpState],
    separator: Option<&GrayImage>,
    regions: &[Region],
    eta: f64,
    mode: ConnectivityMode,
) -> NeighborhoodSystem {
    let limit = std::f64::consts::FRAC_PI_4;
    neighborhood.filter(|a, b| {
        if axial_difference(states[a].theta, states[b].theta) > limit {
            return false;
        }
        let (p, q) = (positions[a], positions[b]);
        if let Some(sep) = separator {
            if connectivity(p, q, sep, mode) > eta || max_along(p, q, sep) > 2.0 * eta {
                return false;
            }
        }
        regions.is_empty() || regions.iter().any(|r| r.contains(p) && r.contains(q))
    })
}

/// Sort key of an edge: `(1 − ‖p − q‖_θ / ‖p − q‖₂) · Γ(e, B)` with `θ` the
/// pair orientation.
pub fn edge_priority(p: Point, q: Point, a: SpState, b: SpState, baseline: &GrayImage, mode: ConnectivityMode) -> f64 {
    let len = p.dist(q);
    assert!(len > 0.0, "edge priority of a zero-length edge");
    let off = off_text_distance(p, q, pair_orientation(a, b));
    (1.0 - off / len) * connectivity(p, q, baseline, mode)
}

/// A cluster reduced to what distance computations need.
#[derive(Debug, Clone)]
pub struct ClusterShape {
    pub projected: Vec<Projected>,
    pub interline_sum: f64,
    pub count: usize,
    bbox: (f64, f64, f64, f64),
}

impl ClusterShape {
    pub fn new(members: &[usize], positions: &[Point], states: &[SpState], deg: usize) -> Self {
        let curve = regression_curve(members, positions, states, deg);
        let projected = project_to_curve(members, positions, &curve);
        let bbox = projected.iter().fold(
            (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
            |(x0, y0, x1, y1), p| (x0.min(p.point.x), y0.min(p.point.y), x1.max(p.point.x), y1.max(p.point.y)),
        );
        let interline_sum = members.iter().map(|&i| states[i].interline).sum();
        Self { projected, interline_sum, count: members.len(), bbox }
    }

    pub fn mean_interline(&self) -> f64 {
        self.interline_sum / self.count as f64
    }
}

/// Distance between two clusters: the smallest off-text distance between
/// projected members closer than `4·s(S₁ ∪ S₂)`, measured orthogonally to
/// the axial mean of their curve tangents. `+∞` if no pair is that close.
pub fn cluster_distance(a: &ClusterShape, b: &ClusterShape) -> f64 {
    let s = (a.interline_sum + b.interline_sum) / (a.count + b.count) as f64;
    let gate = 4.0 * s;
    let gap_x = (a.bbox.0 - b.bbox.2).max(b.bbox.0 - a.bbox.2).max(0.0);
    let gap_y = (a.bbox.1 - b.bbox.3).max(b.bbox.1 - a.bbox.3).max(0.0);
    if gap_x.hypot(gap_y) >= gate {
        return f64::INFINITY;
    }
    let mut best = f64::INFINITY;
    for p in &a.projected {
        for q in &b.projected {
            if p.point.dist(q.point) < gate {
                let theta = axial_mean([p.tangent, q.tangent]).unwrap_or(p.tangent);
                best = best.min(off_text_distance(p.point, q.point, theta));
            }
        }
    }
    best
}

/// [`cluster_distance`] on member lists.
pub fn cluster_distance_of(
    a: &[usize],
    b: &[usize],
    positions: &[Point],
    states: &[SpState],
    deg: usize,
) -> f64 {
    cluster_distance(&ClusterShape::new(a, positions, states, deg), &ClusterShape::new(b, positions, states, deg))
}

/// One polygonal chain per cluster with at least `min_sps` members: the
/// members projected onto the cluster's regression curve, ordered by `t`.
pub fn baselines_from_partition(
    partition: &Partition,
    positions: &[Point],
    states: &[SpState],
    config: &PipelineConfig,
) -> Vec<PolyChain> {
    partition
        .clusters
        .iter()
        .filter(|c| c.len() >= config.min_sps_per_baseline.max(2))
        .filter_map(|c| {
            let curve = regression_curve(c, positions, states, config.reg_degree);
            let pts = project_to_curve(c, positions, &curve).into_iter().map(|p| p.point).collect();
            PolyChain::from_points_dedup(pts).ok()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn st(theta: f64, s: f64) -> SpState {
        SpState { theta, interline: s }
    }

    #[test]
    fn reduce_examples() {
        let pos = vec![Point::new(10.0, 10.0), Point::new(30.0, 10.0), Point::new(50.0, 10.0), Point::new(70.0, 10.0)];
        let n = NeighborhoodSystem::from_edges(4, [(0, 1), (1, 2), (2, 3)]);
        let states = vec![st(0.0, 64.0), st(FRAC_PI_3, 64.0), st(FRAC_PI_3, 64.0), st(FRAC_PI_3, 64.0)];
        let r = reduce_neighborhood(&n, &pos, &states, None, &[], 0.125, ConnectivityMode::Mean);
        assert_eq!(r.edges(), &[(1, 2), (2, 3)]);

        // separator bar at column 40
        let sep = GrayImage::from_fn(20, 80, |_, c| if c == 40 { 1.0 } else { 0.0 });
        let flat = vec![st(0.0, 64.0); 4];
        let r = reduce_neighborhood(&n, &pos, &flat, Some(&sep), &[], 0.125, ConnectivityMode::Mean);
        assert_eq!(r.edges(), &[(0, 1), (2, 3)]);

        let regions = [Region::rect(0.0, 0.0, 40.0, 20.0), Region::rect(45.0, 0.0, 80.0, 20.0)];
        let r = reduce_neighborhood(&n, &pos, &flat, None, &regions, 0.125, ConnectivityMode::Mean);
        assert_eq!(r.edges(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn axial_orientation_test_keeps_near_vertical_pairs() {
        let pos = vec![Point::new(10.0, 10.0), Point::new(10.0, 30.0)];
        let n = NeighborhoodSystem::from_edges(2, [(0, 1)]);
        let states = vec![st(85f64.to_radians(), 64.0), st(-85f64.to_radians(), 64.0)];
        let r = reduce_neighborhood(&n, &pos, &states, None, &[], 0.125, ConnectivityMode::Mean);
        assert_eq!(r.len(), 1);
    }

    #[test]
    fn reduction_is_monotone() {
        let pos: Vec<Point> = (0..6).map(|i| Point::new(10.0 + 12.0 * i as f64, 10.0 + (i % 2) as f64 * 8.0)).collect();
        let n = crate::state::build_neighborhood(&pos);
        let states = vec![st(0.0, 64.0); 6];
        let sep = GrayImage::from_fn(30, 90, |_, c| if c == 45 { 1.0 } else { 0.0 });
        let base = reduce_neighborhood(&n, &pos, &states, None, &[], 0.125, ConnectivityMode::Mean);
        let with_sep = reduce_neighborhood(&n, &pos, &states, Some(&sep), &[], 0.125, ConnectivityMode::Mean);
        let with_both = reduce_neighborhood(&n, &pos, &states, Some(&sep), &[Region::rect(0.0, 0.0, 50.0, 30.0)], 0.125, ConnectivityMode::Mean);
        assert!(with_sep.edges().iter().all(|&(a, b)| base.contains(a, b)));
        assert!(with_both.edges().iter().all(|&(a, b)| with_sep.contains(a, b)));
        assert!(with_sep.len() < base.len());
    }

    #[test]
    fn priority_examples() {
        let img = GrayImage::filled(40, 40, 1.0);
        let m = ConnectivityMode::Mean;
        let p = Point::new(5.0, 5.0);
        assert!((edge_priority(p, Point::new(25.0, 5.0), st(0.0, 64.0), st(0.0, 64.0), &img, m) - 1.0).abs() < 1e-12);
        assert!(edge_priority(p, Point::new(5.0, 25.0), st(0.0, 64.0), st(0.0, 64.0), &img, m).abs() < 1e-12);
        let img8 = GrayImage::filled(40, 40, 0.8);
        let v = edge_priority(p, Point::new(25.0, 25.0), st(0.0, 64.0), st(0.0, 64.0), &img8, m);
        let expect = (1.0 - FRAC_PI_4.sin()) * 0.8f32 as f64;
        assert!((v - expect).abs() < 1e-9);
        assert!((v - 0.234).abs() < 1e-3);
    }

    #[test]
    fn distance_examples() {
        let mut pos = Vec::new();
        for i in 0..10 {
            pos.push(Point::new(10.0 * i as f64, 0.0));
        }
        for i in 0..10 {
            pos.push(Point::new(5.0 + 10.0 * i as f64, 30.0));
        }
        let states = vec![st(0.0, 64.0); 20];
        let a: Vec<usize> = (0..10).collect();
        let b: Vec<usize> = (10..20).collect();
        assert!((cluster_distance_of(&a, &b, &pos, &states, 3) - 30.0).abs() < 1e-9);

        let far: Vec<Point> = pos.iter().enumerate().map(|(i, p)| if i >= 10 { *p + Point::new(10000.0, 0.0) } else { *p }).collect();
        assert_eq!(cluster_distance_of(&a, &b, &far, &states, 3), f64::INFINITY);
    }

    #[test]
    fn slanted_rows_match_dense_oracle() {
        let dir = Point::new(1.0, 1.0) * std::f64::consts::FRAC_1_SQRT_2;
        let normal = Point::new(1.0, -1.0) * std::f64::consts::FRAC_1_SQRT_2;
        let mut pos = Vec::new();
        for i in 0..10 {
            pos.push(dir * (10.0 * i as f64));
        }
        for i in 0..10 {
            pos.push(dir * (10.0 * i as f64 + 3.0) + normal * 20.0);
        }
        let states = vec![st(FRAC_PI_4, 64.0); 20];
        let a: Vec<usize> = (0..10).collect();
        let b: Vec<usize> = (10..20).collect();
        let d = cluster_distance_of(&a, &b, &pos, &states, 3);
        // oracle: exact tangents are 45°, all pairs within the gate
        let mut oracle = f64::INFINITY;
        for &i in &a {
            for &j in &b {
                if pos[i].dist(pos[j]) < 256.0 {
                    oracle = oracle.min(off_text_distance(pos[i], pos[j], FRAC_PI_4));
                }
            }
        }
        assert!((d - oracle).abs() < 1e-6 && (d - 20.0).abs() < 1e-6, "{d} {oracle}");
    }

    #[test]
    fn chains_from_partition() {
        let pos: Vec<Point> = (0..5).map(|i| Point::new(10.0 * (4 - i) as f64, 2.0)).collect();
        let states = vec![st(0.0, 64.0); 6];
        let mut pos6 = pos.clone();
        pos6.push(Point::new(200.0, 200.0));
        let part = Partition { clutter: vec![], clusters: vec![(0..5).collect(), vec![5]] };
        let chains = baselines_from_partition(&part, &pos6, &states, &PipelineConfig::default());
        assert_eq!(chains.len(), 1);
        let c = &chains[0];
        assert_eq!(c.len(), 5);
        assert!(c.points().windows(2).all(|w| w[1].x > w[0].x));
    }

    #[test]
    fn curved_chain_lies_on_cubic() {
        let pos: Vec<Point> = (0..12)
            .map(|i| {
                let t = i as f64 * 8.0;
                Point::new(t, 0.002 * (t - 40.0).powi(2) + 3.0 * ((i * 7) % 3) as f64 - 3.0)
            })
            .collect();
        let states = vec![st(0.0, 64.0); 12];
        let m: Vec<usize> = (0..12).collect();
        let part = Partition { clutter: vec![], clusters: vec![m.clone()] };
        let chain = &baselines_from_partition(&part, &pos, &states, &PipelineConfig::default())[0];
        let curve = regression_curve(&m, &pos, &states, 3);
        let coeffs = curve.coefficients_in_t();
        for p in chain.points() {
            let v = coeffs.iter().rev().fold(0.0, |a, &c| a * p.x + c);
            assert!((v - p.y).abs() < 1e-6);
        }
    }
}
