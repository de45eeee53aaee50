use super::{generate_algebra, ScaledSpace, SetAlgebra};
use crate::bitset::{PointSet, VertexSet};
use crate::ends::LevelDecomposition;
use crate::error::{Error, Result};
use crate::graph::VertexId;

/// Finite model of a graph at a working depth: the universe is the
/// truncated vertex set, the removed ball and the bounded components are
/// bounded, and the unbounded components are tails.
#[derive(Clone, Debug)]
pub struct GraphAlgebra {
    pub space: ScaledSpace,
    pub algebra: SetAlgebra,
    /// Graph vertex of each universe point.
    pub vertices: Vec<VertexId>,
    pub level: usize,
}

impl GraphAlgebra {
    pub fn to_local(&self, set: &VertexSet) -> PointSet {
        PointSet::from_iter(
            self.vertices.len(),
            self.vertices
                .iter()
                .enumerate()
                .filter(|(_, &v)| set.contains(v as usize))
                .map(|(i, _)| i),
        )
    }

    pub fn to_graph(&self, set: &PointSet, universe: usize) -> VertexSet {
        VertexSet::from_iter(universe, set.iter().map(|i| self.vertices[i] as usize))
    }
}

/// `level` is 1-based, matching the levels of the decomposition.
pub fn graph_algebra_adapter(dec: &LevelDecomposition, level: usize) -> Result<GraphAlgebra> {
    if level == 0 || level > dec.depth() {
        return Err(Error::Precondition(format!(
            "level must lie in 1..={}, got {level}",
            dec.depth()
        )));
    }
    let lv = dec.level(level - 1);
    let mut truncated = lv.removed.clone();
    for c in &lv.components {
        truncated.union_with(&c.vertices);
    }
    let vertices: Vec<VertexId> = truncated.iter().map(|v| v as VertexId).collect();
    let n = vertices.len();
    let mut local = vec![usize::MAX; dec.universe()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v as usize] = i;
    }
    let to_local = |s: &VertexSet| PointSet::from_iter(n, s.iter().map(|v| local[v]));

    let mut scale: Vec<PointSet> = lv.removed.iter().map(|v| PointSet::singleton(n, local[v])).collect();
    let mut tails = PointSet::empty(n);
    let mut generators = Vec::with_capacity(lv.components.len());
    for c in &lv.components {
        let set = to_local(&c.vertices);
        if c.is_unbounded() {
            tails.union_with(&set);
        } else {
            scale.push(set.clone());
        }
        generators.push(set);
    }
    let space = ScaledSpace::new(n, scale, tails)?;
    let algebra = generate_algebra(&generators, &space);
    Ok(GraphAlgebra {
        space,
        algebra,
        vertices,
        level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ends::decompose;
    use crate::graph::{build_truncated_cayley, GroupPreset, Horizon};
    use crate::scaled_ba::{compactify, enumerate_ends, EndTag};

    fn adapter(preset: GroupPreset, r: u32, radii: &[u32], level: usize) -> GraphAlgebra {
        let c = build_truncated_cayley(&preset, Horizon::with_radius(r).unwrap()).unwrap();
        let dec = decompose(c.graph(), &c.horizon(), radii).unwrap();
        graph_algebra_adapter(&dec, level).unwrap()
    }

    #[test]
    fn unbounded_atoms_match_end_counts() {
        let z = adapter(GroupPreset::free_abelian(1), 10, &[1, 2, 3], 3);
        assert_eq!(z.algebra.unbounded_atoms().len(), 2);
        let z2 = adapter(GroupPreset::free_abelian(2), 10, &[1, 2, 3], 3);
        assert_eq!(z2.algebra.unbounded_atoms().len(), 1);
        let f2 = adapter(GroupPreset::free_group(2), 6, &[1, 2], 2);
        assert_eq!(f2.algebra.unbounded_atoms().len(), 12);
        assert!(enumerate_ends(&f2.algebra).iter().all(|e| e.tag == EndTag::External));
    }

    #[test]
    fn compactifying_the_line_adds_two_ends() {
        let c = build_truncated_cayley(&GroupPreset::free_abelian(1), Horizon::with_radius(10).unwrap()).unwrap();
        let dec = decompose(c.graph(), &c.horizon(), &[1, 2, 3]).unwrap();
        let ga = graph_algebra_adapter(&dec, 3).unwrap();
        let comp = compactify(&ga.algebra).unwrap();
        assert_eq!(comp.added.len(), 2);
        let ray = c.set_of(|w| w.exponent_sum(1) >= 0);
        let bar = comp.added_in(&ga.to_local(&ray));
        assert_eq!(bar.len(), 1);
    }

    #[test]
    fn level_out_of_range() {
        let c = build_truncated_cayley(&GroupPreset::free_abelian(1), Horizon::with_radius(6).unwrap()).unwrap();
        let dec = decompose(c.graph(), &c.horizon(), &[1, 2]).unwrap();
        assert!(graph_algebra_adapter(&dec, 3).is_err());
        assert!(graph_algebra_adapter(&dec, 0).is_err());
    }
}
