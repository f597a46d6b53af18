use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use crate::config::PipelineConfig;
use crate::geometry::{off_text_distance, Point};
use crate::image::GrayImage;
use crate::state::{connectivity, NeighborhoodSystem, SpState};

use super::{cluster_distance, curvilinearity, edge_priority, pair_orientation, ClusterShape, Partition};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MoveKind {
    /// Both endpoints already share a cluster.
    Absorb,
    /// Two clutter superpixels start a cluster.
    Create,
    /// A clutter superpixel joins a cluster.
    Extend,
    /// Two clusters merge.
    Merge,
    /// The cluster holding the edge's first endpoint returns to clutter.
    Dissolve,
}

/// One step of the clustering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Move {
    pub kind: MoveKind,
    pub edge: (usize, usize),
    /// Total baseline energy after the move.
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub partition: Partition,
    pub moves: Vec<Move>,
    /// Edges in processing order.
    pub sorted_edges: Vec<(usize, usize)>,
}

struct Clustering<'a> {
    positions: &'a [Point],
    states: &'a [SpState],
    neighborhood: &'a NeighborhoodSystem,
    gamma_of: HashMap<(usize, usize), f64>,
    config: &'a PipelineConfig,
    assign: Vec<usize>,
    members: Vec<Vec<usize>>,
    shapes: Vec<Option<ClusterShape>>,
    energy: f64,
    moves: Vec<Move>,
}

/// What a tentative cluster needs in order to be accepted.
struct Plan {
    /// Live clusters to fold into the new cluster, with a connecting edge.
    absorb: Vec<(usize, (usize, usize))>,
}

impl<'a> Clustering<'a> {
    fn shape(&mut self, id: usize) -> &ClusterShape {
        if self.shapes[id].is_none() {
            self.shapes[id] =
                Some(ClusterShape::new(&self.members[id], self.positions, self.states, self.config.reg_degree));
        }
        self.shapes[id].as_ref().expect("just filled")
    }

    fn shape_of(&self, members: &[usize]) -> ClusterShape {
        ClusterShape::new(members, self.positions, self.states, self.config.reg_degree)
    }

    fn curvilinear_ok(&self, members: &[usize]) -> bool {
        curvilinearity(members, self.positions, self.states, self.config.reg_degree) < self.config.gamma
    }

    fn live(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.members.len()).filter(|&id| !self.members[id].is_empty())
    }

    /// An edge of the neighborhood between `set` (sorted) and cluster `id`.
    fn link(&self, set: &[usize], id: usize) -> Option<(usize, usize)> {
        self.members[id].iter().find_map(|&a| {
            self.neighborhood.neighbors(a).iter().find(|b| set.binary_search(b).is_ok()).map(|&b| (b, a))
        })
    }

    /// Checks a tentative cluster against every live cluster outside `skip`.
    ///
    /// A cluster closer than `δ·max(s)` is tolerated only when the two could
    /// legally merge (distance below `δ·min(s)` and a union curvilinear
    /// enough). Such clusters are folded in right away when the neighborhood
    /// links them to the tentative cluster; otherwise they stay pending until
    /// the gap between them closes.
    fn plan(&mut self, mut union: Vec<usize>, skip: &[usize]) -> Option<Plan> {
        if !self.curvilinear_ok(&union) {
            return None;
        }
        let delta = self.config.delta;
        let mut absorbed: Vec<(usize, (usize, usize))> = Vec::new();
        'grow: loop {
            let shape = self.shape_of(&union);
            let s_u = shape.mean_interline();
            let ids: Vec<usize> = self.live().filter(|id| !skip.contains(id) && !absorbed.iter().any(|a| a.0 == *id)).collect();
            for id in ids {
                let other = self.shape(id);
                let s_o = other.mean_interline();
                let d = cluster_distance(&shape, other);
                if d > delta * s_u.max(s_o) {
                    continue;
                }
                if d >= delta * s_u.min(s_o) {
                    return None;
                }
                let mut joint = [union.as_slice(), self.members[id].as_slice()].concat();
                joint.sort_unstable();
                if !self.curvilinear_ok(&joint) {
                    return None;
                }
                if let Some(edge) = self.link(&union, id) {
                    absorbed.push((id, edge));
                    union = joint;
                    continue 'grow;
                }
            }
            return Some(Plan { absorb: absorbed });
        }
    }

    fn gamma(&self, a: usize, b: usize) -> f64 {
        self.gamma_of[&(a.min(b), a.max(b))]
    }

    fn log(&mut self, kind: MoveKind, edge: (usize, usize)) {
        self.moves.push(Move { kind, edge, energy: self.energy });
    }

    fn join(&mut self, p: usize, id: usize) {
        let gain: f64 = self
            .neighborhood
            .neighbors(p)
            .iter()
            .filter(|&&r| self.assign[r] == id)
            .map(|&r| self.gamma(p, r))
            .sum();
        self.energy += gain;
        self.assign[p] = id;
        let m = &mut self.members[id];
        let at = m.binary_search(&p).unwrap_err();
        m.insert(at, p);
        self.shapes[id] = None;
    }

    /// Folds cluster `gone` into `keep`.
    fn merge(&mut self, keep: usize, gone: usize) {
        let moved = std::mem::take(&mut self.members[gone]);
        let gain: f64 = moved
            .iter()
            .flat_map(|&a| self.neighborhood.neighbors(a).iter().map(move |&b| (a, b)))
            .filter(|&(_, b)| self.assign[b] == keep)
            .map(|(a, b)| self.gamma(a, b))
            .sum();
        self.energy += gain;
        for &a in &moved {
            self.assign[a] = keep;
        }
        let mut all = [self.members[keep].as_slice(), moved.as_slice()].concat();
        all.sort_unstable();
        self.members[keep] = all;
        self.shapes[keep] = None;
        self.shapes[gone] = None;
    }

    fn apply_plan(&mut self, target: usize, plan: Plan) {
        for (id, edge) in plan.absorb {
            self.merge(target, id);
            self.log(MoveKind::Merge, edge);
        }
    }

    fn try_edge(&mut self, p: usize, q: usize) -> bool {
        let (cp, cq) = (self.assign[p], self.assign[q]);
        let delta = self.config.delta;
        match (cp, cq) {
            (a, b) if a > 0 && a == b => {
                self.log(MoveKind::Absorb, (p, q));
                true
            }
            (0, 0) => {
                let (sp, sq) = (self.states[p], self.states[q]);
                let s = 0.5 * (sp.interline + sq.interline);
                if off_text_distance(self.positions[p], self.positions[q], pair_orientation(sp, sq)) >= delta * s {
                    return false;
                }
                let pair = vec![p.min(q), p.max(q)];
                let Some(plan) = self.plan(pair.clone(), &[]) else { return false };
                let id = self.members.len();
                self.members.push(Vec::new());
                self.shapes.push(None);
                self.join(pair[0], id);
                self.join(pair[1], id);
                self.log(MoveKind::Create, (p, q));
                self.apply_plan(id, plan);
                true
            }
            (0, i) | (i, 0) => {
                let edge = (p, q);
                let p = if cp == 0 { p } else { q };
                let single = self.shape_of(&[p]);
                let s_i = self.shape(i).mean_interline();
                if cluster_distance(self.shape(i), &single) >= delta * s_i {
                    return false;
                }
                let mut union = self.members[i].clone();
                let at = union.binary_search(&p).unwrap_err();
                union.insert(at, p);
                let Some(plan) = self.plan(union, &[i]) else { return false };
                self.join(p, i);
                self.log(MoveKind::Extend, edge);
                self.apply_plan(i, plan);
                true
            }
            (i, j) => {
                let (si, sj) = (self.shape(i).mean_interline(), self.shape(j).mean_interline());
                let d = {
                    let a = self.shape(i).clone();
                    cluster_distance(&a, self.shape(j))
                };
                if d >= delta * si.min(sj) {
                    return false;
                }
                let mut union = [self.members[i].as_slice(), self.members[j].as_slice()].concat();
                union.sort_unstable();
                let Some(plan) = self.plan(union, &[i, j]) else { return false };
                let (keep, gone) = (i.min(j), i.max(j));
                self.merge(keep, gone);
                self.log(MoveKind::Merge, (p, q));
                self.apply_plan(keep, plan);
                true
            }
        }
    }

    /// A pair of live clusters violating the separation condition.
    fn violation(&mut self) -> Option<(usize, usize)> {
        let ids: Vec<usize> = self.live().collect();
        let delta = self.config.delta;
        for (k, &a) in ids.iter().enumerate() {
            for &b in &ids[k + 1..] {
                let sa = self.shape(a).clone();
                let sb = self.shape(b);
                if cluster_distance(&sa, sb) <= delta * sa.mean_interline().max(sb.mean_interline()) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Shortest path from cluster `a` to cluster `b` whose interior runs
    /// through clutter only. Returns the edge sequence.
    fn clutter_path(&self, a: usize, b: usize) -> Option<Vec<(usize, usize)>> {
        let mut prev: HashMap<usize, usize> = HashMap::new();
        let mut queue: VecDeque<usize> = self.members[a].iter().copied().collect();
        let start: Vec<usize> = self.members[a].clone();
        while let Some(u) = queue.pop_front() {
            for &v in self.neighborhood.neighbors(u) {
                if start.binary_search(&v).is_ok() || prev.contains_key(&v) {
                    continue;
                }
                if self.assign[v] == b {
                    let mut path = vec![(u, v)];
                    let mut cur = u;
                    while let Some(&p) = prev.get(&cur) {
                        path.push((p, cur));
                        cur = p;
                    }
                    path.reverse();
                    return Some(path);
                }
                if self.assign[v] == 0 {
                    prev.insert(v, u);
                    queue.push_back(v);
                }
            }
        }
        None
    }

    /// Resolves separation violations left pending by the greedy pass:
    /// first by joining the two clusters through a clutter path, otherwise
    /// by returning the smaller cluster to clutter.
    fn close_gaps(&mut self) {
        while let Some((a, b)) = self.violation() {
            if let Some(path) = self.clutter_path(a, b) {
                let mut union: Vec<usize> = self.members[a].iter().chain(&self.members[b]).copied().collect();
                union.extend(path.iter().map(|e| e.1).filter(|&v| self.assign[v] == 0));
                union.sort_unstable();
                if let Some(plan) = self.plan(union, &[a, b]) {
                    for &(u, v) in &path {
                        if self.assign[v] == 0 {
                            self.join(v, a);
                            self.log(MoveKind::Extend, (v, u));
                        } else {
                            self.merge(a, b);
                            self.log(MoveKind::Merge, (u, v));
                        }
                    }
                    self.apply_plan(a, plan);
                    continue;
                }
            }
            let drop = if self.members[a].len() < self.members[b].len() { a } else { b };
            let first = self.members[drop][0];
            let gone = std::mem::take(&mut self.members[drop]);
            let loss: f64 = self
                .neighborhood
                .edges()
                .iter()
                .filter(|(x, y)| self.assign[*x] == drop && self.assign[*y] == drop)
                .map(|&(x, y)| self.gamma(x, y))
                .sum();
            self.energy -= loss;
            for p in gone {
                self.assign[p] = 0;
            }
            self.shapes[drop] = None;
            self.log(MoveKind::Dissolve, (first, first));
        }
    }
}

/// Greedy clustering of superpixels into baselines.
///
/// Edges are sorted by [`edge_priority`] (descending, endpoint indices on
/// ties) and scanned repeatedly until a full pass consumes none. The four
/// move cases use the usual gates: off-text distance below `δ·s` to start a
/// cluster, curvilinearity below `γ` and distance below `δ·s(S_i)` to extend
/// one, distance below `δ·min(s_i, s_j)` to merge two.
///
/// Every resulting cluster must also keep its distance to the others above
/// `δ·max(s_i, s_j)`. Clusters that violate this but could merge with the
/// moving cluster (typically two pieces of one line growing toward each
/// other) are merged as soon as an edge links them and tolerated until then.
/// Violations still pending after the scan are closed through clutter
/// paths, or, failing that, resolved by dissolving the smaller cluster, so
/// the returned partition always satisfies both conditions.
pub fn greedy_cluster(
    positions: &[Point],
    states: &[SpState],
    neighborhood: &NeighborhoodSystem,
    baseline: &GrayImage,
    config: &PipelineConfig,
) -> ClusterOutcome {
    let mode = config.connectivity;
    let mut gamma_of = HashMap::with_capacity(neighborhood.len());
    let mut keyed: Vec<(f64, (usize, usize))> = Vec::with_capacity(neighborhood.len());
    for &(a, b) in neighborhood.edges() {
        let (p, q) = (positions[a], positions[b]);
        gamma_of.insert((a, b), connectivity(p, q, baseline, mode));
        let prio = if p == q { 0.0 } else { edge_priority(p, q, states[a], states[b], baseline, mode) };
        keyed.push((prio, (a, b)));
    }
    keyed.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let sorted_edges: Vec<(usize, usize)> = keyed.into_iter().map(|(_, e)| e).collect();

    let mut c = Clustering {
        positions,
        states,
        neighborhood,
        gamma_of,
        config,
        assign: vec![0; positions.len()],
        members: vec![Vec::new()],
        shapes: vec![None],
        energy: 0.0,
        moves: Vec::new(),
    };
    let mut remaining = sorted_edges.clone();
    loop {
        let before = remaining.len();
        remaining.retain(|&(p, q)| !c.try_edge(p, q));
        if remaining.len() == before {
            break;
        }
    }
    c.close_gaps();

    let mut clusters: Vec<Vec<usize>> = c.members.into_iter().skip(1).filter(|m| !m.is_empty()).collect();
    clusters.sort_by_key(|m| m[0]);
    let clutter = (0..positions.len()).filter(|&i| c.assign[i] == 0).collect();
    ClusterOutcome { partition: Partition { clutter, clusters }, moves: c.moves, sorted_edges }
}
