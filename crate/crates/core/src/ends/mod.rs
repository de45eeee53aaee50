//! End enumeration by exhausting balls.
//!
//! Level `n` removes the open ball `{v : d(basepoint, v) < r_n}` from the
//! truncated graph and splits the rest into components. Unbounded
//! components of consecutive levels are nested, and the nesting forms the
//! end tree: root-to-depth-`n` branches approximate the ends at depth `n`.

mod classify;
mod tree;

use rayon::prelude::*;
use serde::Serialize;

pub use classify::{classify, EndClassification, Verdict};
pub use tree::{end_tree, ends_at_depth, EndTree, TreeNode};

use crate::bitset::VertexSet;
use crate::error::{Error, Result};
use crate::graph::{classify_component, components, Extent, Graph, Horizon, VertexId};

#[derive(Clone, Debug)]
pub struct LevelComponent {
    pub vertices: VertexSet,
    pub extent: Extent,
    /// Smallest vertex id in the component.
    pub representative: VertexId,
}

impl LevelComponent {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_unbounded(&self) -> bool {
        self.extent.is_unbounded()
    }
}

#[derive(Clone, Debug)]
pub struct Level {
    pub radius: u32,
    /// The removed open ball.
    pub removed: VertexSet,
    pub components: Vec<LevelComponent>,
}

impl Level {
    pub fn unbounded(&self) -> impl Iterator<Item = (usize, &LevelComponent)> {
        self.components.iter().enumerate().filter(|(_, c)| c.is_unbounded())
    }

    pub fn unbounded_count(&self) -> usize {
        self.unbounded().count()
    }

    /// Union of the bounded components of this level.
    pub fn bounded_union(&self, universe: usize) -> VertexSet {
        let mut out = VertexSet::empty(universe);
        for c in self.components.iter().filter(|c| !c.is_unbounded()) {
            out.union_with(&c.vertices);
        }
        out
    }
}

#[derive(Clone, Debug)]
pub struct LevelDecomposition {
    horizon: Horizon,
    levels: Vec<Level>,
    /// `parents[n][i]`: for an unbounded component `i` of level `n >= 1`, the
    /// index of the unbounded component of level `n - 1` containing it.
    parents: Vec<Vec<Option<usize>>>,
    basepoint: VertexId,
    truncated_size: usize,
    universe: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelCounts {
    pub radius: u32,
    pub unbounded: usize,
    pub bounded: usize,
}

impl LevelDecomposition {
    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &Level {
        &self.levels[n]
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn radii(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.radius).collect()
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn basepoint(&self) -> VertexId {
        self.basepoint
    }

    pub fn truncated_size(&self) -> usize {
        self.truncated_size
    }

    /// Unbounded component counts per level.
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Level::unbounded_count).collect()
    }

    pub fn level_counts(&self) -> Vec<LevelCounts> {
        self.levels
            .iter()
            .map(|l| {
                let unbounded = l.unbounded_count();
                LevelCounts {
                    radius: l.radius,
                    unbounded,
                    bounded: l.components.len() - unbounded,
                }
            })
            .collect()
    }

    /// Parent of unbounded component `i` at level `n >= 1`.
    pub fn parent(&self, n: usize, i: usize) -> Option<usize> {
        self.parents.get(n).and_then(|p| p.get(i)).copied().flatten()
    }
}

/// Densest exhausting sequence the horizon supports, `1..=R - 2·shell`,
/// optionally cut to `levels` entries.
pub fn default_radii(horizon: &Horizon, levels: Option<usize>) -> Vec<u32> {
    let top = horizon.radius().saturating_sub(2 * horizon.shell_width());
    let mut radii: Vec<u32> = (1..=top).collect();
    if let Some(l) = levels {
        radii.truncate(l);
    }
    radii
}

fn check_radii(horizon: &Horizon, radii: &[u32]) -> Result<()> {
    for (n, &r) in radii.iter().enumerate() {
        if n > 0 && r <= radii[n - 1] {
            return Err(Error::BadRadius {
                level: n + 1,
                radius: r,
                reason: format!("radii must strictly increase (previous {})", radii[n - 1]),
            });
        }
        if r + horizon.shell_width() > horizon.radius() {
            return Err(Error::BadRadius {
                level: n + 1,
                radius: r,
                reason: format!(
                    "radius + shell width {} exceeds horizon radius {}",
                    horizon.shell_width(),
                    horizon.radius()
                ),
            });
        }
    }
    Ok(())
}

fn build_level(graph: &Graph, horizon: &Horizon, truncated: &VertexSet, radius: u32) -> Level {
    let removed = graph.depth_below(radius);
    let region = truncated.difference(&removed);
    let components = components(graph, &region)
        .into_iter()
        .map(|vertices| LevelComponent {
            extent: classify_component(graph, &vertices, horizon),
            representative: vertices.first().expect("components are nonempty") as VertexId,
            vertices,
        })
        .collect();
    Level {
        radius,
        removed,
        components,
    }
}

/// Components of `X \ B(basepoint, r_n)` for every radius, their
/// classification, and the refinement map between unbounded components.
pub fn decompose(graph: &Graph, horizon: &Horizon, radii: &[u32]) -> Result<LevelDecomposition> {
    check_radii(horizon, radii)?;
    let truncated = graph.truncated(horizon);
    let levels: Vec<Level> = radii
        .par_iter()
        .map(|&r| build_level(graph, horizon, &truncated, r))
        .collect();

    let n = graph.vertex_count();
    let mut parents = vec![Vec::new(); levels.len()];
    for depth in 1..levels.len() {
        let mut owner = vec![usize::MAX; n];
        for (i, c) in levels[depth - 1].unbounded() {
            for v in c.vertices.iter() {
                owner[v] = i;
            }
        }
        let level = &levels[depth];
        let mut map = vec![None; level.components.len()];
        for (i, c) in level.unbounded() {
            let parent = owner[c.representative as usize];
            if parent == usize::MAX || c.vertices.iter().any(|v| owner[v] != parent) {
                return Err(Error::Internal(format!(
                    "unbounded component {i} of level {} is not inside a single unbounded component of level {}",
                    depth + 1,
                    depth
                )));
            }
            map[i] = Some(parent);
        }
        parents[depth] = map;
    }
    Ok(LevelDecomposition {
        horizon: *horizon,
        levels,
        parents,
        basepoint: graph.basepoint(),
        truncated_size: truncated.len(),
        universe: n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_truncated_cayley, GroupPreset};

    fn counts(preset: GroupPreset, r: u32, radii: &[u32]) -> Vec<usize> {
        let c = build_truncated_cayley(&preset, Horizon::with_radius(r).unwrap()).unwrap();
        decompose(c.graph(), &c.horizon(), radii).unwrap().counts()
    }

    #[test]
    fn preset_counts() {
        assert_eq!(counts(GroupPreset::free_abelian(1), 20, &[1, 2, 3, 4, 5]), vec![2; 5]);
        assert_eq!(counts(GroupPreset::free_abelian(2), 20, &[1, 2, 3, 4, 5]), vec![1; 5]);
        assert_eq!(
            counts(GroupPreset::free_group(2), 10, &[1, 2, 3, 4]),
            vec![4, 12, 36, 108]
        );
    }

    #[test]
    fn radii_errors_name_the_offender() {
        let c = build_truncated_cayley(&GroupPreset::free_abelian(1), Horizon::with_radius(10).unwrap()).unwrap();
        let h = c.horizon();
        match decompose(c.graph(), &h, &[1, 3, 3]).unwrap_err() {
            Error::BadRadius { level, radius, .. } => assert_eq!((level, radius), (3, 3)),
            e => panic!("{e}"),
        }
        match decompose(c.graph(), &h, &[2, 10]).unwrap_err() {
            Error::BadRadius { level, radius, .. } => assert_eq!((level, radius), (2, 10)),
            e => panic!("{e}"),
        }
        assert!(decompose(c.graph(), &h, &[9]).is_ok());
    }

    #[test]
    fn default_radii_leave_two_shells() {
        let h = Horizon::new(10, 2).unwrap();
        assert_eq!(default_radii(&h, None), (1..=6).collect::<Vec<_>>());
        assert_eq!(default_radii(&h, Some(3)), vec![1, 2, 3]);
    }

    #[test]
    fn bounded_components_are_kept_but_not_counted() {
        // a lollipop: path 0-1-2-..-12 plus a pendant pair hanging off vertex 1
        let mut edges: Vec<(u32, u32)> = (0..12).map(|k| (k, k + 1)).collect();
        edges.push((1, 13));
        edges.push((13, 14));
        let g = Graph::from_edges(15, &edges, 0).unwrap();
        let h = Horizon::with_radius(12).unwrap();
        let dec = decompose(&g, &h, &[2, 3, 4]).unwrap();
        assert_eq!(dec.counts(), vec![1, 1, 1]);
        assert_eq!(dec.level_counts()[0].bounded, 1);
        assert_eq!(dec.level(0).bounded_union(15).to_vec(), vec![13, 14]);
    }
}
