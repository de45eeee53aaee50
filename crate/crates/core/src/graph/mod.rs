//! Locally finite graphs with a basepoint, truncated to a horizon.
//!
//! Every computation in the crate reads only vertices within
//! `horizon.radius` of the basepoint. Balls, spheres and component
//! decompositions are breadth-first traversals of the induced subgraph.

mod cayley;
mod group;
mod io;
mod space;

use std::collections::VecDeque;

pub use cayley::{build_truncated_cayley, max_vertices_override, CayleyGraph, MAX_VERTICES_ENV};
pub use group::{
    validate_oracle, CyclicOracle, FreeAbelianOracle, FreeGroupOracle, GroupPreset, Letter, NormalFormOracle,
    OracleRegistry, PresetKind, Word,
};
pub use io::{parse_graph, read_graph};
pub use space::Space;

use crate::bitset::VertexSet;
use crate::error::{Error, Result};

pub type VertexId = u32;

/// Distance value for vertices not reachable from the source.
pub const UNREACHABLE: u32 = u32::MAX;

/// Finite truncation of an infinite space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Horizon {
    radius: u32,
    shell_width: u32,
}

impl Horizon {
    pub fn new(radius: u32, shell_width: u32) -> Result<Self> {
        if shell_width == 0 {
            return Err(Error::InvalidHorizon("shell width must be positive".into()));
        }
        if radius < shell_width {
            return Err(Error::InvalidHorizon(format!(
                "radius {radius} is smaller than shell width {shell_width}"
            )));
        }
        Ok(Self { radius, shell_width })
    }

    pub fn with_radius(radius: u32) -> Result<Self> {
        Self::new(radius, 1)
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn shell_width(&self) -> u32 {
        self.shell_width
    }

    /// Smallest distance from the basepoint that counts as shell contact.
    pub fn shell_start(&self) -> u32 {
        self.radius - self.shell_width + 1
    }
}

/// Undirected simple graph on dense ids `0..n` with a basepoint.
#[derive(Clone, Debug)]
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
    basepoint: VertexId,
    labels: Vec<Option<String>>,
    depth: Vec<u32>,
}

impl Graph {
    /// Builds a graph, checking symmetry, loops, duplicates and the basepoint.
    pub fn new(mut adjacency: Vec<Vec<VertexId>>, basepoint: VertexId, labels: Vec<Option<String>>) -> Result<Self> {
        let n = adjacency.len();
        if (basepoint as usize) >= n {
            return Err(Error::InvalidGraph(format!(
                "basepoint {basepoint} is not a vertex (n = {n})"
            )));
        }
        if !labels.is_empty() && labels.len() != n {
            return Err(Error::InvalidGraph("label count differs from vertex count".into()));
        }
        for (v, nbrs) in adjacency.iter_mut().enumerate() {
            nbrs.sort_unstable();
            if nbrs.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("duplicate neighbor at vertex {v}")));
            }
            if nbrs.binary_search(&(v as VertexId)).is_ok() {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {v}")));
            }
            if let Some(&u) = nbrs.iter().find(|&&u| u as usize >= n) {
                return Err(Error::InvalidGraph(format!("vertex {v} has unknown neighbor {u}")));
            }
        }
        for (v, nbrs) in adjacency.iter().enumerate() {
            for &u in nbrs {
                if adjacency[u as usize].binary_search(&(v as VertexId)).is_err() {
                    return Err(Error::InvalidGraph(format!("edge {v}-{u} is not symmetric")));
                }
            }
        }
        let labels = if labels.is_empty() { vec![None; n] } else { labels };
        let depth = bfs(&adjacency, [basepoint], None, u32::MAX);
        Ok(Self {
            adjacency,
            basepoint,
            labels,
            depth,
        })
    }

    /// Builds a graph from an edge list on `n` vertices.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)], basepoint: VertexId) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidGraph(format!("edge {u}-{v} out of range")));
            }
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
        Self::new(adjacency, basepoint, Vec::new())
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn basepoint(&self) -> VertexId {
        self.basepoint
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v as usize]
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels[v as usize].as_deref()
    }

    /// Distance from the basepoint, `UNREACHABLE` when disconnected.
    pub fn depth(&self, v: VertexId) -> u32 {
        self.depth[v as usize]
    }

    pub fn depths(&self) -> &[u32] {
        &self.depth
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(v, nbrs)| {
            nbrs.iter()
                .filter(move |&&u| (v as VertexId) < u)
                .map(move |&u| (v as VertexId, u))
        })
    }

    pub fn empty_set(&self) -> VertexSet {
        VertexSet::empty(self.vertex_count())
    }

    /// All vertices within the horizon.
    pub fn truncated(&self, horizon: &Horizon) -> VertexSet {
        self.depth_at_most(horizon.radius)
    }

    /// Vertices with `depth <= r`: the ball around the basepoint.
    pub fn depth_at_most(&self, r: u32) -> VertexSet {
        VertexSet::from_iter(
            self.vertex_count(),
            self.depth.iter().enumerate().filter(|(_, &d)| d <= r).map(|(v, _)| v),
        )
    }

    /// Vertices with `depth < r`: the open ball around the basepoint.
    pub fn depth_below(&self, r: u32) -> VertexSet {
        match r {
            0 => self.empty_set(),
            r => self.depth_at_most(r - 1),
        }
    }

    fn in_horizon(&self, v: VertexId, horizon: &Horizon) -> bool {
        self.depth[v as usize] <= horizon.radius
    }

    /// Breadth-first distances from `sources` inside the truncated graph,
    /// stopping at `limit`.
    pub fn distances_from(&self, horizon: &Horizon, sources: &VertexSet, limit: u32) -> Vec<u32> {
        let inside = |v: VertexId| self.in_horizon(v, horizon);
        let starts = sources.iter().map(|v| v as VertexId).filter(|&v| inside(v));
        bfs(&self.adjacency, starts, Some(&inside), limit)
    }

    /// Closed ball `B(center, r)` in the truncated graph.
    pub fn ball(&self, horizon: &Horizon, center: VertexId, r: u32) -> Result<VertexSet> {
        if r > horizon.radius {
            return Err(Error::BallExceedsHorizon {
                radius: r,
                horizon: horizon.radius,
            });
        }
        if center as usize >= self.vertex_count() || !self.in_horizon(center, horizon) {
            return Err(Error::OutsideHorizon(center));
        }
        let src = VertexSet::singleton(self.vertex_count(), center as usize);
        Ok(self.within_distance(horizon, &src, r))
    }

    /// Vertices at exact distance `r` from `center`.
    pub fn sphere(&self, horizon: &Horizon, center: VertexId, r: u32) -> Result<VertexSet> {
        let outer = self.ball(horizon, center, r)?;
        Ok(match r {
            0 => outer,
            _ => outer.difference(&self.ball(horizon, center, r - 1)?),
        })
    }

    /// `B(A, r)`: vertices within distance `r` of the set, in the truncated graph.
    pub fn within_distance(&self, horizon: &Horizon, set: &VertexSet, r: u32) -> VertexSet {
        let dist = self.distances_from(horizon, set, r);
        VertexSet::from_iter(
            self.vertex_count(),
            dist.iter().enumerate().filter(|(_, &d)| d <= r).map(|(v, _)| v),
        )
    }

    /// Largest basepoint distance among members, `None` for the empty set.
    pub fn reach(&self, set: &VertexSet) -> Option<u32> {
        set.iter().map(|v| self.depth[v]).max()
    }

    /// Graph with the same vertex set restricted to the ball of radius `r`
    /// around the basepoint; vertices outside keep their ids but lose edges.
    pub fn restrict_to_depth(&self, r: u32) -> Graph {
        let keep = |v: VertexId| self.depth[v as usize] <= r;
        let adjacency = self
            .adjacency
            .iter()
            .enumerate()
            .map(|(v, nbrs)| {
                if keep(v as VertexId) {
                    nbrs.iter().copied().filter(|&u| keep(u)).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        Graph::new(adjacency, self.basepoint, self.labels.clone()).expect("restriction of a valid graph is valid")
    }
}

fn bfs<I>(adjacency: &[Vec<VertexId>], sources: I, admit: Option<&dyn Fn(VertexId) -> bool>, limit: u32) -> Vec<u32>
where
    I: IntoIterator<Item = VertexId>,
{
    let mut dist = vec![UNREACHABLE; adjacency.len()];
    let mut queue = VecDeque::new();
    for s in sources {
        if dist[s as usize] == UNREACHABLE {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v as usize];
        if d >= limit {
            continue;
        }
        for &u in &adjacency[v as usize] {
            if dist[u as usize] == UNREACHABLE && admit.is_none_or(|f| f(u)) {
                dist[u as usize] = d + 1;
                queue.push_back(u);
            }
        }
    }
    dist
}

/// Maximal connected subsets of the induced subgraph on `region`, ordered
/// by their minimal vertex id.
pub fn components(graph: &Graph, region: &VertexSet) -> Vec<VertexSet> {
    let n = graph.vertex_count();
    let mut seen = VertexSet::empty(n);
    let mut parts = Vec::new();
    let mut queue = VecDeque::new();
    for start in region.iter() {
        if seen.contains(start) {
            continue;
        }
        let mut part = VertexSet::empty(n);
        seen.insert(start);
        part.insert(start);
        queue.push_back(start as VertexId);
        while let Some(v) = queue.pop_front() {
            for &u in graph.neighbors(v) {
                let u = u as usize;
                if region.contains(u) && !seen.contains(u) {
                    seen.insert(u);
                    part.insert(u);
                    queue.push_back(u as VertexId);
                }
            }
        }
        parts.push(part);
    }
    parts
}

/// Whether a component is witnessed unbounded inside the horizon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Extent {
    UnboundedWithinHorizon,
    BoundedWithinHorizon,
}

impl Extent {
    pub fn is_unbounded(self) -> bool {
        self == Extent::UnboundedWithinHorizon
    }
}

/// A set is unbounded within the horizon iff it touches the shell.
pub fn classify_component(graph: &Graph, component: &VertexSet, horizon: &Horizon) -> Extent {
    let shell = horizon.shell_start();
    let touches = component
        .iter()
        .any(|v| graph.depth(v as VertexId) >= shell && graph.depth(v as VertexId) <= horizon.radius);
    if touches {
        Extent::UnboundedWithinHorizon
    } else {
        Extent::BoundedWithinHorizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Path on `-r..=r`, vertex id of `k` is its BFS rank from 0.
    pub(crate) fn line(r: i64) -> (Graph, impl Fn(i64) -> usize) {
        let id = |k: i64| -> usize {
            if k == 0 {
                0
            } else if k > 0 {
                (2 * k - 1) as usize
            } else {
                (2 * -k) as usize
            }
        };
        let n = (2 * r + 1) as usize;
        let edges: Vec<_> = (-r..r).map(|k| (id(k) as VertexId, id(k + 1) as VertexId)).collect();
        (Graph::from_edges(n, &edges, 0).unwrap(), id)
    }

    #[test]
    fn rejects_asymmetric_and_loops() {
        assert!(Graph::new(vec![vec![1], vec![]], 0, vec![]).is_err());
        assert!(Graph::new(vec![vec![0]], 0, vec![]).is_err());
        assert!(Graph::new(vec![vec![1, 1], vec![0, 0]], 0, vec![]).is_err());
        assert!(Graph::new(vec![vec![]], 3, vec![]).is_err());
    }

    #[test]
    fn horizon_needs_room_for_shell() {
        assert!(Horizon::new(2, 3).is_err());
        assert!(Horizon::new(2, 0).is_err());
        assert_eq!(Horizon::new(10, 2).unwrap().shell_start(), 9);
    }

    #[test]
    fn balls_on_the_line() {
        let (g, id) = line(10);
        let h = Horizon::with_radius(10).unwrap();
        assert_eq!(g.ball(&h, 0, 0).unwrap().to_vec(), vec![0]);
        let b = g.ball(&h, 0, 2).unwrap();
        let mut want: Vec<_> = (-2..=2).map(&id).collect();
        want.sort();
        assert_eq!(b.to_vec(), want);
        assert!(matches!(g.ball(&h, 0, 11), Err(Error::BallExceedsHorizon { .. })));
        assert_eq!(g.sphere(&h, 0, 3).unwrap().len(), 2);
    }

    #[test]
    fn line_minus_ball_has_two_unbounded_components() {
        let (g, id) = line(10);
        let h = Horizon::with_radius(10).unwrap();
        let region = g.truncated(&h).difference(&g.ball(&h, 0, 1).unwrap());
        let parts = components(&g, &region);
        assert_eq!(parts.len(), 2);
        let right = VertexSet::from_iter(g.vertex_count(), (2..=10).map(&id));
        let left = VertexSet::from_iter(g.vertex_count(), (-10..=-2).map(&id));
        assert!(parts.contains(&right) && parts.contains(&left));
        assert_eq!(classify_component(&g, &right, &h), Extent::UnboundedWithinHorizon);
    }

    #[test]
    fn interior_island_is_bounded() {
        let (g, id) = line(10);
        let h = Horizon::with_radius(10).unwrap();
        let island = VertexSet::from_iter(g.vertex_count(), [id(3), id(4)]);
        let parts = components(&g, &island);
        assert_eq!(parts, vec![island.clone()]);
        assert_eq!(classify_component(&g, &island, &h), Extent::BoundedWithinHorizon);
    }

    #[test]
    fn empty_region_has_no_components() {
        let (g, _) = line(3);
        assert!(components(&g, &g.empty_set()).is_empty());
    }

    #[test]
    fn set_neighborhoods() {
        let (g, id) = line(10);
        let h = Horizon::with_radius(10).unwrap();
        let a = VertexSet::from_iter(g.vertex_count(), [id(5)]);
        let b = g.within_distance(&h, &a, 2);
        assert_eq!(b.len(), 5);
        assert!(b.contains(id(3)) && b.contains(id(7)));
    }
}
