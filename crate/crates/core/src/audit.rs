//! Independent re-check of clustering results.
//!
//! Nothing here reuses the clustering code paths: regression goes through
//! normal equations, orientation means and cluster distances are recomputed
//! by brute force. The checks therefore catch bookkeeping errors in the
//! greedy clustering as well as numerical disagreements.

// dense elimination reads clearest with explicit row and column indices
#![allow(clippy::needless_range_loop)]

use std::collections::{BTreeSet, HashMap};

use crate::cluster::{ClusterOutcome, MoveKind, Partition};
use crate::config::PipelineConfig;
use crate::geometry::Point;
use crate::image::GrayImage;
use crate::state::{connectivity, NeighborhoodSystem, SpState};

/// Relative slack for comparisons against `γ` and `δ·s`, covering the
/// rounding difference between two least-squares solvers.
const SLACK: f64 = 1e-7;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub violations: Vec<String>,
    pub clusters_checked: usize,
}

impl AuditReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

fn mean_orientation(thetas: &[f64]) -> f64 {
    let (c, s) = thetas.iter().fold((0.0, 0.0), |(c, s), t| (c + (2.0 * t).cos(), s + (2.0 * t).sin()));
    if c * c + s * s < 1e-24 {
        return thetas[0];
    }
    0.5 * s.atan2(c)
}

/// Least squares through normal equations on a centered, scaled abscissa.
/// Returns a closure-friendly coefficient vector plus centering.
fn fit(tv: &[(f64, f64)], deg: usize) -> (Vec<f64>, f64, f64) {
    let n = tv.len() as f64;
    let mc = tv.iter().map(|p| p.0).sum::<f64>() / n;
    let sc = tv.iter().map(|p| (p.0 - mc).abs()).fold(0.0, f64::max);
    if sc <= 1e-9 * (1.0 + mc.abs()) {
        return (vec![tv.iter().map(|p| p.1).sum::<f64>() / n], mc, 1.0);
    }
    let distinct: BTreeSet<i64> = tv.iter().map(|p| ((p.0 - mc) / sc * 1e8).round() as i64).collect();
    let m = deg.min(distinct.len() - 1).min(tv.len() - 1);
    let k = m + 1;
    let mut a = vec![vec![0.0; k + 1]; k];
    for &(t, v) in tv {
        let u = (t - mc) / sc;
        for r in 0..k {
            for c in 0..k {
                a[r][c] += u.powi((r + c) as i32);
            }
            a[r][k] += v * u.powi(r as i32);
        }
    }
    for col in 0..k {
        let piv = (col..k).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        if a[col][col].abs() < 1e-300 {
            continue;
        }
        for r in 0..k {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..=k {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    ((0..k).map(|i| if a[i][i].abs() < 1e-300 { 0.0 } else { a[i][k] / a[i][i] }).collect(), mc, sc)
}

struct Fitted {
    theta: f64,
    coeffs: Vec<f64>,
    mc: f64,
    sc: f64,
}

impl Fitted {
    fn new(members: &[usize], pos: &[Point], states: &[SpState], deg: usize) -> (Self, Vec<(f64, f64)>) {
        let thetas: Vec<f64> = members.iter().map(|&i| states[i].theta).collect();
        let theta = mean_orientation(&thetas);
        let (s, c) = theta.sin_cos();
        let tv: Vec<(f64, f64)> = members.iter().map(|&i| (pos[i].x * c + pos[i].y * s, -pos[i].x * s + pos[i].y * c)).collect();
        let (coeffs, mc, sc) = fit(&tv, deg);
        (Self { theta, coeffs, mc, sc }, tv)
    }

    fn eval(&self, t: f64) -> f64 {
        let u = (t - self.mc) / self.sc;
        self.coeffs.iter().enumerate().map(|(k, c)| c * u.powi(k as i32)).sum()
    }

    fn slope(&self, t: f64) -> f64 {
        let u = (t - self.mc) / self.sc;
        self.coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c * u.powi(k as i32 - 1)).sum::<f64>() / self.sc
    }

    /// Projected point and world tangent angle for a rotated abscissa.
    fn project(&self, t: f64) -> (Point, f64) {
        let v = self.eval(t);
        let (s, c) = self.theta.sin_cos();
        (Point::new(t * c - v * s, t * s + v * c), self.theta + self.slope(t).atan())
    }
}

/// Curvilinearity recomputed from scratch.
pub fn audit_curvilinearity(members: &[usize], pos: &[Point], states: &[SpState], deg: usize) -> f64 {
    if members.len() <= deg + 1 {
        return 0.0;
    }
    let (f, tv) = Fitted::new(members, pos, states, deg);
    let s = members.iter().map(|&i| states[i].interline).sum::<f64>() / members.len() as f64;
    (tv.iter().map(|&(t, v)| (v - f.eval(t)).powi(2)).sum::<f64>() / tv.len() as f64).sqrt() / s
}

/// Cluster distance recomputed by enumerating all projected pairs.
pub fn audit_cluster_distance(a: &[usize], b: &[usize], pos: &[Point], states: &[SpState], deg: usize) -> f64 {
    let project = |m: &[usize]| -> Vec<(Point, f64)> {
        let (f, tv) = Fitted::new(m, pos, states, deg);
        tv.iter().map(|&(t, _)| f.project(t)).collect()
    };
    let (pa, pb) = (project(a), project(b));
    let s = a.iter().chain(b).map(|&i| states[i].interline).sum::<f64>() / (a.len() + b.len()) as f64;
    let mut best = f64::INFINITY;
    for &(p, tp) in &pa {
        for &(q, tq) in &pb {
            if (p - q).norm() < 4.0 * s {
                let theta = mean_orientation(&[tp, tq]);
                let d = ((p.x - q.x) * theta.sin() - (p.y - q.y) * theta.cos()).abs();
                best = best.min(d);
            }
        }
    }
    best
}

/// Checks the partition property, connectivity of every cluster in the
/// reduced neighborhood, curvilinearity below `γ` and pairwise separation
/// above `δ·max(s_i, s_j)`.
pub fn audit_partition(
    partition: &Partition,
    positions: &[Point],
    states: &[SpState],
    reduced: &NeighborhoodSystem,
    config: &PipelineConfig,
) -> AuditReport {
    let n = positions.len();
    let mut report = AuditReport { clusters_checked: partition.clusters.len(), ..Default::default() };
    let mut seen = vec![0usize; n];
    for &i in partition.clutter.iter().chain(partition.clusters.iter().flatten()) {
        if i >= n {
            report.violations.push(format!("index {i} out of range"));
            continue;
        }
        seen[i] += 1;
    }
    for (i, &c) in seen.iter().enumerate() {
        if c != 1 {
            report.violations.push(format!("superpixel {i} appears {c} times"));
        }
    }
    let deg = config.reg_degree;
    for (ci, c) in partition.clusters.iter().enumerate() {
        if c.is_empty() {
            report.violations.push(format!("cluster {ci} is empty"));
            continue;
        }
        // linked: flood fill along reduced edges inside the cluster
        let inside: BTreeSet<usize> = c.iter().copied().collect();
        let mut reached = BTreeSet::from([c[0]]);
        let mut stack = vec![c[0]];
        while let Some(u) = stack.pop() {
            for &(a, b) in reduced.edges() {
                let v = if a == u { b } else if b == u { a } else { continue };
                if inside.contains(&v) && reached.insert(v) {
                    stack.push(v);
                }
            }
        }
        if reached.len() != inside.len() {
            report.violations.push(format!("cluster {ci} is not linked ({} of {} reached)", reached.len(), inside.len()));
        }
        let cur = audit_curvilinearity(c, positions, states, deg);
        if cur >= config.gamma * (1.0 + SLACK) {
            report.violations.push(format!("cluster {ci} curvilinearity {cur} ≥ {}", config.gamma));
        }
    }
    let s_of = |c: &[usize]| c.iter().map(|&i| states[i].interline).sum::<f64>() / c.len() as f64;
    for i in 0..partition.clusters.len() {
        for j in i + 1..partition.clusters.len() {
            let (a, b) = (&partition.clusters[i], &partition.clusters[j]);
            if a.is_empty() || b.is_empty() {
                continue;
            }
            let d = audit_cluster_distance(a, b, positions, states, deg);
            let bound = config.delta * s_of(a).max(s_of(b));
            if d <= bound * (1.0 - SLACK) {
                report.violations.push(format!("clusters {i} and {j} at distance {d} ≤ {bound}"));
            }
        }
    }
    report
}

/// Replays the move log and checks that every move is consistent with its
/// recorded kind and that the total baseline energy, recomputed from
/// scratch after each move, matches the log and never decreases except
/// where a cluster is dissolved. Finally the replayed partition must equal
/// the reported one.
pub fn audit_moves(
    outcome: &ClusterOutcome,
    positions: &[Point],
    reduced: &NeighborhoodSystem,
    baseline: &GrayImage,
    config: &PipelineConfig,
) -> Vec<String> {
    let mut problems = Vec::new();
    let gammas: Vec<f64> = reduced
        .edges()
        .iter()
        .map(|&(a, b)| connectivity(positions[a], positions[b], baseline, config.connectivity))
        .collect();
    let mut label = vec![0usize; positions.len()];
    let mut next = 1;
    let energy_of = |label: &[usize]| -> f64 {
        reduced
            .edges()
            .iter()
            .zip(&gammas)
            .filter(|((a, b), _)| label[*a] != 0 && label[*a] == label[*b])
            .map(|(_, g)| g)
            .sum()
    };
    let mut last = 0.0;
    for (k, m) in outcome.moves.iter().enumerate() {
        let (p, q) = m.edge;
        let (lp, lq) = (label[p], label[q]);
        if m.kind == MoveKind::Dissolve {
            if lp == 0 {
                problems.push(format!("move {k}: dissolving clutter superpixel {p}"));
            }
            label.iter_mut().filter(|l| **l == lp).for_each(|l| *l = 0);
            let e = energy_of(&label);
            if (e - m.energy).abs() > 1e-6 * (1.0 + e.abs()) {
                problems.push(format!("move {k}: logged energy {} but recomputed {e}", m.energy));
            }
            last = e;
            continue;
        }
        if p != q && !reduced.contains(p, q) {
            problems.push(format!("move {k}: edge ({p}, {q}) not in the neighborhood"));
        }
        let expected = match (lp, lq) {
            (a, b) if a > 0 && a == b => MoveKind::Absorb,
            (0, 0) => MoveKind::Create,
            (0, _) | (_, 0) => MoveKind::Extend,
            _ => MoveKind::Merge,
        };
        if expected != m.kind {
            problems.push(format!("move {k}: logged {:?}, replay says {:?}", m.kind, expected));
        }
        match expected {
            MoveKind::Absorb => {}
            MoveKind::Create => {
                label[p] = next;
                label[q] = next;
                next += 1;
            }
            MoveKind::Extend => {
                let id = lp.max(lq);
                label[p] = id;
                label[q] = id;
            }
            MoveKind::Dissolve => unreachable!("handled above"),
            MoveKind::Merge => {
                for l in label.iter_mut() {
                    if *l == lq {
                        *l = lp;
                    }
                }
            }
        }
        let e = energy_of(&label);
        if (e - m.energy).abs() > 1e-6 * (1.0 + e.abs()) {
            problems.push(format!("move {k}: logged energy {} but recomputed {e}", m.energy));
        }
        if e < last - 1e-9 {
            problems.push(format!("move {k}: energy decreased from {last} to {e}"));
        }
        last = e;
    }
    // replayed clusters must match the reported partition
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, &l) in label.iter().enumerate() {
        if l > 0 {
            groups.entry(l).or_default().push(i);
        }
    }
    let mut replayed: Vec<Vec<usize>> = groups.into_values().collect();
    replayed.sort();
    let mut reported = outcome.partition.clusters.clone();
    reported.iter_mut().for_each(|c| c.sort_unstable());
    reported.sort();
    if replayed != reported {
        problems.push("replayed partition differs from the reported one".into());
    }
    problems
}
