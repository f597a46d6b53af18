//! Scoring detected baselines against ground truth.
//!
//! Each chain is resampled at 1-px steps. A sample is covered by the other
//! chain when its Euclidean distance to that chain is at most the
//! tolerance. For a ground-truth/hypothesis pair, the recall coverage is the
//! covered fraction of the ground-truth samples and the precision coverage
//! the covered fraction of the hypothesis samples. Pairs are matched one to
//! one, best score first, where the score is the harmonic mean of both
//! coverages. Precision and recall average the matched coverages over all
//! hypothesis and ground-truth chains respectively.

use serde::Serialize;

use crate::geometry::{Point, PolyChain};
use crate::groundtruth::{chain_interline_distance, DEFAULT_INTERLINE};

/// Smallest tolerance used by [`default_tolerance`].
pub const MIN_TOLERANCE: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchPair {
    pub gt: usize,
    pub hyp: usize,
    pub recall_coverage: f64,
    pub precision_coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PageReport {
    pub gt_count: usize,
    pub hyp_count: usize,
    /// Sum of matched recall coverages.
    pub recall_mass: f64,
    /// Sum of matched precision coverages.
    pub precision_mass: f64,
    pub tolerance: f64,
    pub matches: Vec<MatchPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f_value: f64,
    pub pages: Vec<PageReport>,
}

fn f_value(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Fraction of the 1-px samples of `a` within `tol` of `b`.
pub fn coverage(a: &PolyChain, b: &PolyChain, tol: f64) -> f64 {
    let samples = a.resample(1.0);
    let hit = samples.iter().filter(|(p, _)| b.distance_to(*p) <= tol).count();
    hit as f64 / samples.len() as f64
}

/// Scores one page.
pub fn match_page(gt: &[PolyChain], hyp: &[PolyChain], tol: f64) -> PageReport {
    assert!(tol > 0.0, "tolerance must be positive");
    let mut pairs = Vec::new();
    for (g, gc) in gt.iter().enumerate() {
        for (h, hc) in hyp.iter().enumerate() {
            let r = coverage(gc, hc, tol);
            let p = coverage(hc, gc, tol);
            let score = f_value(p, r);
            if score > 0.0 {
                pairs.push((score, MatchPair { gt: g, hyp: h, recall_coverage: r, precision_coverage: p }));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.total_cmp(&a.0)
            .then((a.1.gt + a.1.hyp).cmp(&(b.1.gt + b.1.hyp)))
            .then(a.1.gt.min(a.1.hyp).cmp(&b.1.gt.min(b.1.hyp)))
            .then(a.1.gt.cmp(&b.1.gt))
    });
    let (mut gt_used, mut hyp_used) = (vec![false; gt.len()], vec![false; hyp.len()]);
    let mut matches = Vec::new();
    for (_, m) in pairs {
        if !gt_used[m.gt] && !hyp_used[m.hyp] {
            gt_used[m.gt] = true;
            hyp_used[m.hyp] = true;
            matches.push(m);
        }
    }
    matches.sort_by_key(|m| (m.gt, m.hyp));
    PageReport {
        gt_count: gt.len(),
        hyp_count: hyp.len(),
        recall_mass: matches.iter().map(|m| m.recall_coverage).sum(),
        precision_mass: matches.iter().map(|m| m.precision_coverage).sum(),
        tolerance: tol,
        matches,
    }
}

/// Micro-averages page reports: coverage mass over chain counts across all
/// pages. With no chains at all on either side the score is perfect; with
/// no hypotheses but some ground truth it is zero.
pub fn aggregate(pages: Vec<PageReport>) -> EvalReport {
    let n_gt: usize = pages.iter().map(|p| p.gt_count).sum();
    let n_hyp: usize = pages.iter().map(|p| p.hyp_count).sum();
    let r_mass: f64 = pages.iter().map(|p| p.recall_mass).sum();
    let p_mass: f64 = pages.iter().map(|p| p.precision_mass).sum();
    let (precision, recall) = match (n_gt, n_hyp) {
        (0, 0) => (1.0, 1.0),
        (_, 0) => (0.0, 0.0),
        (0, _) => (0.0, 1.0),
        _ => (p_mass / n_hyp as f64, r_mass / n_gt as f64),
    };
    EvalReport { precision, recall, f_value: f_value(precision, recall), pages }
}

/// Single-page evaluation.
pub fn match_baselines(gt: &[PolyChain], hyp: &[PolyChain], tol: f64) -> EvalReport {
    aggregate(vec![match_page(gt, hyp, tol)])
}

/// `max(12, 0.25 · median interline distance of the ground truth)`.
pub fn default_tolerance(gt: &[PolyChain]) -> f64 {
    if gt.len() < 2 {
        return MIN_TOLERANCE.max(0.25 * DEFAULT_INTERLINE);
    }
    let mut d: Vec<f64> = (0..gt.len()).map(|i| chain_interline_distance(i, gt, DEFAULT_INTERLINE)).collect();
    d.sort_by(f64::total_cmp);
    let mid = d.len() / 2;
    let median = if d.len() % 2 == 1 { d[mid] } else { 0.5 * (d[mid - 1] + d[mid]) };
    MIN_TOLERANCE.max(0.25 * median)
}

/// Evaluates several pages, each at its own default tolerance unless `tol`
/// is given.
pub fn evaluate_pages(pages: &[(Vec<PolyChain>, Vec<PolyChain>)], tol: Option<f64>) -> EvalReport {
    aggregate(
        pages
            .iter()
            .map(|(gt, hyp)| match_page(gt, hyp, tol.unwrap_or_else(|| default_tolerance(gt))))
            .collect(),
    )
}

/// Leftmost point of each chain, topmost among equal `x`.
pub fn origin_points(chains: &[PolyChain]) -> Vec<Point> {
    chains
        .iter()
        .map(|c| {
            *c.points()
                .iter()
                .min_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)))
                .expect("chains are never empty")
        })
        .collect()
}
