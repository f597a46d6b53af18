use std::collections::{BTreeSet, HashMap};

use crate::geometry::Point;

/// Undirected edge set over superpixel indices. Edges are stored once as
/// `(i, j)` with `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NeighborhoodSystem {
    n: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

impl NeighborhoodSystem {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let set: BTreeSet<(usize, usize)> = edges
            .into_iter()
            .filter(|(a, b)| a != b)
            .inspect(|&(a, b)| assert!(a < n && b < n, "edge ({a}, {b}) out of range for {n} nodes"))
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        let edges: Vec<_> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
        }
        Self { n, edges, adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Keeps the edges accepted by `keep`.
    pub fn filter(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Self {
        Self::from_edges(self.n, self.edges.iter().copied().filter(|&(a, b)| keep(a, b)))
    }
}

/// Delaunay neighborhood of the given positions.
///
/// Repeated positions share the neighbors of their first occurrence. With
/// fewer than three distinct points, or when all are collinear, the points
/// are chained along the axis of largest spread instead.
pub fn build_neighborhood(points: &[Point]) -> NeighborhoodSystem {
    let n = points.len();
    let mut first_of: HashMap<(u64, u64), usize> = HashMap::new();
    let mut unique = Vec::new(); // indices into `points`
    let mut rep = vec![0usize; n]; // point -> index into `unique`
    for (i, p) in points.iter().enumerate() {
        let key = (p.x.to_bits(), p.y.to_bits());
        let u = *first_of.entry(key).or_insert_with(|| {
            unique.push(i);
            unique.len() - 1
        });
        rep[i] = u;
    }

    let coords: Vec<delaunator::Point> = unique
        .iter()
        .map(|&i| delaunator::Point { x: points[i].x, y: points[i].y })
        .collect();
    let mut unique_edges: Vec<(usize, usize)> = Vec::new();
    let tri = if coords.len() >= 3 { Some(delaunator::triangulate(&coords)) } else { None };
    match tri {
        Some(t) if !t.triangles.is_empty() => {
            for tr in t.triangles.chunks(3) {
                unique_edges.extend([(tr[0], tr[1]), (tr[1], tr[2]), (tr[2], tr[0])]);
            }
        }
        _ => {
            let (min_x, max_x, min_y, max_y) = coords.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
                |(a, b, c, d), p| (a.min(p.x), b.max(p.x), c.min(p.y), d.max(p.y)),
            );
            let by_x = max_x - min_x >= max_y - min_y;
            let mut order: Vec<usize> = (0..coords.len()).collect();
            order.sort_by(|&a, &b| {
                let (pa, pb) = (&coords[a], &coords[b]);
                if by_x {
                    pa.x.total_cmp(&pb.x).then(pa.y.total_cmp(&pb.y))
                } else {
                    pa.y.total_cmp(&pb.y).then(pa.x.total_cmp(&pb.x))
                }
            });
            unique_edges.extend(order.windows(2).map(|w| (w[0], w[1])));
        }
    }

    // expand back onto every original index
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); unique.len()];
    for (i, &u) in rep.iter().enumerate() {
        members[u].push(i);
    }
    let mut edges = Vec::new();
    for (a, b) in unique_edges {
        for &i in &members[a] {
            for &j in &members[b] {
                edges.push((i, j));
            }
        }
    }
    NeighborhoodSystem::from_edges(n, edges)
}
