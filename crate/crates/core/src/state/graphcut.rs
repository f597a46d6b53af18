use std::collections::VecDeque;

use super::labels::smoothing_cost_index;
use super::neighborhood::NeighborhoodSystem;

const EPS: f64 = 1e-12;

/// Dinic max-flow on a small dense-ish graph with `f64` capacities.
struct FlowGraph {
    head: Vec<Vec<usize>>,
    to: Vec<usize>,
    cap: Vec<f64>,
}

impl FlowGraph {
    fn new(n: usize) -> Self {
        Self { head: vec![Vec::new(); n], to: Vec::new(), cap: Vec::new() }
    }

    /// Adds `a → b` with capacity `c_ab` and `b → a` with `c_ba`.
    fn add_edge(&mut self, a: usize, b: usize, c_ab: f64, c_ba: f64) {
        self.head[a].push(self.to.len());
        self.to.push(b);
        self.cap.push(c_ab);
        self.head[b].push(self.to.len());
        self.to.push(a);
        self.cap.push(c_ba);
    }

    fn levels(&self, s: usize) -> Vec<i32> {
        let mut level = vec![-1; self.head.len()];
        level[s] = 0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for &e in &self.head[u] {
                let v = self.to[e];
                if self.cap[e] > EPS && level[v] < 0 {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        level
    }

    fn augment(&mut self, u: usize, t: usize, pushed: f64, level: &[i32], iter: &mut [usize]) -> f64 {
        if u == t {
            return pushed;
        }
        while iter[u] < self.head[u].len() {
            let e = self.head[u][iter[u]];
            let v = self.to[e];
            if self.cap[e] > EPS && level[v] == level[u] + 1 {
                let got = self.augment(v, t, pushed.min(self.cap[e]), level, iter);
                if got > EPS {
                    self.cap[e] -= got;
                    self.cap[e ^ 1] += got;
                    return got;
                }
            }
            iter[u] += 1;
        }
        0.0
    }

    /// Runs max-flow and returns the source side of a minimum cut.
    fn min_cut(&mut self, s: usize, t: usize) -> Vec<bool> {
        loop {
            let level = self.levels(s);
            if level[t] < 0 {
                return level.iter().map(|&l| l >= 0).collect();
            }
            let mut iter = vec![0; self.head.len()];
            while self.augment(s, t, f64::INFINITY, &level, &mut iter) > EPS {}
        }
    }
}

/// Labeling cost `α Σ D_p(l_p) + β Σ_{(p,q)} V(l_p, l_q)` with labels given
/// as indices into the cost rows.
pub fn labeling_cost(
    labeling: &[usize],
    costs: &[Vec<f64>],
    neighborhood: &NeighborhoodSystem,
    alpha: f64,
    beta: f64,
    sigma: f64,
) -> f64 {
    let data: f64 = labeling.iter().zip(costs).map(|(&l, c)| c[l]).sum();
    let smooth: f64 = neighborhood
        .edges()
        .iter()
        .map(|&(a, b)| smoothing_cost_index(labeling[a], labeling[b], sigma))
        .sum();
    alpha * data + beta * smooth
}

/// Per-node argmin of the data cost (lowest label index on ties).
pub fn greedy_labeling(costs: &[Vec<f64>]) -> Vec<usize> {
    costs
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::INFINITY), |best, (i, &c)| if c < best.1 { (i, c) } else { best })
                .0
        })
        .collect()
}

/// Minimizes the labeling cost by iterated α-β swap moves, starting from
/// the greedy labeling. Label pairs are visited in lexicographic order and
/// sweeps repeat until one makes no strict improvement.
pub fn minimize_labeling(
    costs: &[Vec<f64>],
    neighborhood: &NeighborhoodSystem,
    alpha: f64,
    beta: f64,
    sigma: f64,
) -> Vec<usize> {
    let n = costs.len();
    let mut labeling = greedy_labeling(costs);
    if n == 0 || beta == 0.0 || neighborhood.is_empty() {
        return labeling;
    }
    let n_labels = costs[0].len();
    let mut current = labeling_cost(&labeling, costs, neighborhood, alpha, beta, sigma);
    loop {
        let mut improved = false;
        for a in 0..n_labels {
            for b in a + 1..n_labels {
                let Some(candidate) = swap_move(&labeling, a, b, costs, neighborhood, alpha, beta, sigma) else {
                    continue;
                };
                let cost = labeling_cost(&candidate, costs, neighborhood, alpha, beta, sigma);
                if cost < current - 1e-9 * current.abs().max(1.0) {
                    labeling = candidate;
                    current = cost;
                    improved = true;
                }
            }
        }
        if !improved {
            return labeling;
        }
    }
}

/// Optimal relabeling of the nodes currently carrying `a` or `b` with
/// labels in `{a, b}`, all other labels fixed.
#[allow(clippy::too_many_arguments)]
fn swap_move(
    labeling: &[usize],
    a: usize,
    b: usize,
    costs: &[Vec<f64>],
    neighborhood: &NeighborhoodSystem,
    alpha: f64,
    beta: f64,
    sigma: f64,
) -> Option<Vec<usize>> {
    let members: Vec<usize> = (0..labeling.len()).filter(|&p| labeling[p] == a || labeling[p] == b).collect();
    if members.is_empty() {
        return None;
    }
    let mut slot = vec![usize::MAX; labeling.len()];
    for (i, &p) in members.iter().enumerate() {
        slot[p] = i;
    }
    let (s, t) = (members.len(), members.len() + 1);
    let mut g = FlowGraph::new(members.len() + 2);
    let v_ab = beta * smoothing_cost_index(a, b, sigma);
    for (i, &p) in members.iter().enumerate() {
        // source side ⇒ label a, paying the p → t capacity
        let mut cost_a = alpha * costs[p][a];
        let mut cost_b = alpha * costs[p][b];
        for &q in neighborhood.neighbors(p) {
            if slot[q] == usize::MAX {
                cost_a += beta * smoothing_cost_index(a, labeling[q], sigma);
                cost_b += beta * smoothing_cost_index(b, labeling[q], sigma);
            } else if q > p && v_ab > 0.0 {
                g.add_edge(i, slot[q], v_ab, v_ab);
            }
        }
        g.add_edge(s, i, cost_b, 0.0);
        g.add_edge(i, t, cost_a, 0.0);
    }
    let source_side = g.min_cut(s, t);
    let mut out = labeling.to_vec();
    for (i, &p) in members.iter().enumerate() {
        out[p] = if source_side[i] { a } else { b };
    }
    Some(out)
}
