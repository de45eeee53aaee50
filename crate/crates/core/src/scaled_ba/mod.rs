//! Finite scaled Boolean algebras.
//!
//! A scale is stored by its generators; its elements are the finite unions
//! of generators, so the largest bounded set is the union of all of them.
//! An algebra is stored by its atoms, which partition the universe; its
//! elements are the unions of atoms.
//!
//! Tail points model the part of an infinite space cut off by a finite
//! truncation. They are unbounded but are not points at infinity: an atom
//! consisting of tail points only yields an external end.

mod adapter;
mod compactify;
mod ends;
mod io;

pub use adapter::{graph_algebra_adapter, GraphAlgebra};
pub use compactify::{compactify, Compactification, CompactifyChecks};
pub use ends::{
    enumerate_ends, hausdorff_violations, is_compact_at_infinity, is_hausdorff, subalgebra_compactness_check,
    Compactness, End, EndTag,
};
pub use io::{parse_scaled_space, read_scaled_space, report, BaInstance, BaReport};

use crate::bitset::PointSet;
use crate::error::{Error, Result};
use crate::graph::{components, Graph};

/// Largest number of atoms for which elements are listed explicitly.
pub const MAX_LISTED_ATOMS: usize = 16;
/// Largest number of scale elements enumerated by closure under unions.
pub const MAX_SCALE_ELEMENTS: usize = 1 << 16;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScaledSpace {
    universe: usize,
    generators: Vec<PointSet>,
    hull: PointSet,
    tails: PointSet,
}

impl ScaledSpace {
    pub fn new(universe: usize, generators: Vec<PointSet>, tails: PointSet) -> Result<Self> {
        let mut hull = PointSet::empty(universe);
        for g in &generators {
            if g.universe() != universe {
                return Err(Error::InvalidSpace(format!(
                    "scale generator {g:?} lives in a universe of {} points, expected {universe}",
                    g.universe()
                )));
            }
            hull.union_with(g);
        }
        if tails.universe() != universe {
            return Err(Error::InvalidSpace("tail set has the wrong universe".into()));
        }
        if tails.intersects(&hull) {
            return Err(Error::InvalidSpace(format!(
                "tail points must be unbounded, but {:?} lie in the scale",
                tails.intersection(&hull)
            )));
        }
        let mut generators: Vec<PointSet> = generators.into_iter().filter(|g| !g.is_empty()).collect();
        generators.sort();
        generators.dedup();
        Ok(Self {
            universe,
            generators,
            hull,
            tails,
        })
    }

    /// Space without tail points.
    pub fn plain(universe: usize, generators: Vec<PointSet>) -> Result<Self> {
        Self::new(universe, generators, PointSet::empty(universe))
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn generators(&self) -> &[PointSet] {
        &self.generators
    }

    /// The largest bounded set: the union of every scale element.
    pub fn bounded_hull(&self) -> &PointSet {
        &self.hull
    }

    pub fn tails(&self) -> &PointSet {
        &self.tails
    }

    pub fn full(&self) -> PointSet {
        PointSet::full(self.universe)
    }

    pub fn empty(&self) -> PointSet {
        PointSet::empty(self.universe)
    }

    pub fn is_bounded(&self, set: &PointSet) -> bool {
        set.is_subset(&self.hull)
    }

    /// Points whose singleton is unbounded, excluding tail points.
    pub fn points_at_infinity(&self) -> PointSet {
        self.hull.union(&self.tails).complement()
    }

    /// All scale elements: the empty set and every union of generators.
    pub fn scale_elements(&self) -> Result<Vec<PointSet>> {
        let mut seen = std::collections::HashSet::new();
        let mut out = vec![self.empty()];
        seen.insert(self.empty());
        let mut i = 0;
        while i < out.len() {
            let base = out[i].clone();
            for g in &self.generators {
                let next = base.union(g);
                if seen.insert(next.clone()) {
                    if out.len() >= MAX_SCALE_ELEMENTS {
                        return Err(Error::TooLarge(format!(
                            "scale has more than {MAX_SCALE_ELEMENTS} elements"
                        )));
                    }
                    out.push(next);
                }
            }
            i += 1;
        }
        out.sort();
        Ok(out)
    }

    /// Whether the scale is closed under subsets.
    pub fn is_bornology(&self) -> Result<bool> {
        let elements: std::collections::HashSet<PointSet> = self.scale_elements()?.into_iter().collect();
        Ok(elements.iter().all(|b| {
            b.iter().all(|p| {
                let mut smaller = b.clone();
                smaller.remove(p);
                elements.contains(&smaller)
            })
        }))
    }

    /// Scaled subspace on `y`, re-indexed to `0..|y|` in increasing order.
    pub fn restrict(&self, y: &PointSet) -> (ScaledSpace, Vec<usize>) {
        let points = y.to_vec();
        let project = |s: &PointSet| {
            PointSet::from_iter(
                points.len(),
                points
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| s.contains(p))
                    .map(|(i, _)| i),
            )
        };
        let generators = self.generators.iter().map(project).collect();
        let space = ScaledSpace::new(points.len(), generators, project(&self.tails))
            .expect("restriction keeps tails outside the scale");
        (space, points)
    }
}

/// `C ≡ D mod S`: some scale element contains the symmetric difference.
pub fn mod_equiv(c: &PointSet, d: &PointSet, space: &ScaledSpace) -> bool {
    mod_equiv_witness(c, d, space).is_some()
}

/// A scale element `B` with `C \ B = D \ B`, namely the union of the
/// generators meeting `C Δ D`.
pub fn mod_equiv_witness(c: &PointSet, d: &PointSet, space: &ScaledSpace) -> Option<PointSet> {
    let diff = c.symmetric_difference(d);
    let mut b = space.empty();
    for g in space.generators().iter().filter(|g| g.intersects(&diff)) {
        b.union_with(g);
    }
    diff.is_subset(&b).then_some(b)
}

/// `X \ C ≡ X \ D mod S`.
pub fn complement_equiv_check(c: &PointSet, d: &PointSet, space: &ScaledSpace) -> bool {
    mod_equiv(&c.complement(), &d.complement(), space)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetAlgebra {
    space: ScaledSpace,
    atoms: Vec<PointSet>,
}

fn refine(atoms: &mut Vec<PointSet>, by: &PointSet) {
    let mut next = Vec::with_capacity(atoms.len() + 1);
    for a in atoms.drain(..) {
        let inside = a.intersection(by);
        if inside.is_empty() || inside == a {
            next.push(a);
        } else {
            next.push(a.difference(&inside));
            next.push(inside);
        }
    }
    *atoms = next;
}

/// Smallest algebra containing the generators and the scale.
pub fn generate_algebra(generators: &[PointSet], space: &ScaledSpace) -> SetAlgebra {
    let mut atoms = Vec::new();
    if space.universe() > 0 {
        atoms.push(space.full());
    }
    for g in space.generators().iter().chain(generators) {
        refine(&mut atoms, g);
    }
    atoms.sort();
    SetAlgebra {
        space: space.clone(),
        atoms,
    }
}

impl SetAlgebra {
    /// Algebra given by an explicit family, which must already be closed
    /// and contain the scale.
    pub fn from_family(space: &ScaledSpace, family: &[PointSet]) -> Result<Self> {
        let alg = generate_algebra(family, space);
        let mut given: Vec<PointSet> = family.to_vec();
        given.sort();
        given.dedup();
        if alg.atom_count() > MAX_LISTED_ATOMS || alg.elements()? != given {
            return Err(Error::NotClosed);
        }
        Ok(alg)
    }

    pub fn space(&self) -> &ScaledSpace {
        &self.space
    }

    pub fn atoms(&self) -> &[PointSet] {
        &self.atoms
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Number of elements, saturating at `u128::MAX`.
    pub fn element_count(&self) -> u128 {
        1u128.checked_shl(self.atoms.len() as u32).unwrap_or(u128::MAX)
    }

    pub fn atom_of(&self, point: usize) -> usize {
        self.atoms
            .iter()
            .position(|a| a.contains(point))
            .expect("atoms cover the universe")
    }

    /// Whether `set` is a union of atoms.
    pub fn contains(&self, set: &PointSet) -> bool {
        set.universe() == self.space.universe() && self.atoms.iter().all(|a| a.is_subset(set) || a.is_disjoint(set))
    }

    /// Union of the atoms whose indices are set in `mask`.
    pub fn element_from_mask(&self, mask: u64) -> PointSet {
        let mut out = self.space.empty();
        for (i, a) in self.atoms.iter().enumerate() {
            if i < 64 && mask >> i & 1 == 1 {
                out.union_with(a);
            }
        }
        out
    }

    /// Every element, in canonical order.
    pub fn elements(&self) -> Result<Vec<PointSet>> {
        if self.atoms.len() > MAX_LISTED_ATOMS {
            return Err(Error::TooLarge(format!(
                "algebra has {} atoms; listing is limited to {MAX_LISTED_ATOMS}",
                self.atoms.len()
            )));
        }
        let mut out: Vec<PointSet> = (0..1u64 << self.atoms.len())
            .map(|m| self.element_from_mask(m))
            .collect();
        out.sort();
        Ok(out)
    }

    /// Indices of atoms that are not contained in the bounded hull.
    pub fn unbounded_atoms(&self) -> Vec<usize> {
        (0..self.atoms.len())
            .filter(|&i| !self.space.is_bounded(&self.atoms[i]))
            .collect()
    }

    /// The smallest element containing `set`.
    pub fn hull_of(&self, set: &PointSet) -> PointSet {
        let mut out = self.space.empty();
        for a in self.atoms.iter().filter(|a| a.intersects(set)) {
            out.union_with(a);
        }
        out
    }

    /// Trace algebra on `y`, re-indexed like [`ScaledSpace::restrict`].
    pub fn restrict(&self, y: &PointSet) -> (SetAlgebra, Vec<usize>) {
        let (space, points) = self.space.restrict(y);
        let project = |s: &PointSet| {
            PointSet::from_iter(
                points.len(),
                points
                    .iter()
                    .enumerate()
                    .filter(|(_, &p)| s.contains(p))
                    .map(|(i, _)| i),
            )
        };
        let traces: Vec<PointSet> = self.atoms.iter().map(project).collect();
        (generate_algebra(&traces, &space), points)
    }
}

/// The algebra of sets equivalent mod S to a union of components of
/// `X \ B` for some scale element `B`.
#[derive(Clone, Debug)]
pub struct InducedAlgebra {
    /// Algebra generated by every component of every `X \ B`.
    pub algebra: SetAlgebra,
    /// Canonical representatives: component unions with the bounded hull
    /// removed, deduplicated and sorted.
    pub representatives: Vec<PointSet>,
}

pub fn induced_algebra(space: &ScaledSpace, graph: &Graph) -> Result<InducedAlgebra> {
    if graph.vertex_count() != space.universe() {
        return Err(Error::InvalidSpace(format!(
            "connectivity graph has {} vertices, universe has {}",
            graph.vertex_count(),
            space.universe()
        )));
    }
    let mut all_components = Vec::new();
    let mut representatives = std::collections::BTreeSet::new();
    for b in space.scale_elements()? {
        let parts = components(graph, &b.complement());
        let mut bounded = space.empty();
        for p in parts.iter().filter(|p| space.is_bounded(p)) {
            bounded.union_with(p);
        }
        if !space.is_bounded(&bounded) {
            return Err(Error::InducedHypothesis { bounded: b.to_vec() });
        }
        if parts.len() > 20 {
            return Err(Error::TooLarge(format!("X \\ {b:?} has {} components", parts.len())));
        }
        for mask in 0..1u32 << parts.len() {
            let mut union = space.empty();
            for (i, p) in parts.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    union.union_with(p);
                }
            }
            representatives.insert(union.difference(space.bounded_hull()));
        }
        all_components.extend(parts);
    }
    Ok(InducedAlgebra {
        algebra: generate_algebra(&all_components, space),
        representatives: representatives.into_iter().collect(),
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Points are written 1-based as in the file format.
    pub(crate) fn set(n: usize, pts: &[usize]) -> PointSet {
        PointSet::from_iter(n, pts.iter().map(|p| p - 1))
    }

    #[test]
    fn mod_equiv_examples() {
        let s = ScaledSpace::plain(4, vec![set(4, &[1])]).unwrap();
        assert!(mod_equiv(&set(4, &[1, 2]), &set(4, &[2]), &s));
        assert!(!mod_equiv(&set(4, &[1, 2]), &set(4, &[3]), &s));
        assert!(mod_equiv(&set(4, &[3]), &set(4, &[3]), &s));
        assert!(complement_equiv_check(&set(4, &[1, 2]), &set(4, &[2]), &s));
        assert!(!complement_equiv_check(&set(4, &[1, 2]), &set(4, &[3]), &s));
    }

    #[test]
    fn generated_algebra_sizes() {
        let trivial = ScaledSpace::plain(3, vec![]).unwrap();
        assert_eq!(generate_algebra(&[], &trivial).elements().unwrap().len(), 2);
        let two = ScaledSpace::plain(2, vec![]).unwrap();
        assert_eq!(generate_algebra(&[set(2, &[1])], &two).elements().unwrap().len(), 4);
        let s = ScaledSpace::plain(4, vec![set(4, &[1])]).unwrap();
        let alg = generate_algebra(&[set(4, &[1, 2])], &s);
        assert_eq!(alg.elements().unwrap().len(), 8);
        assert_eq!(alg.atoms(), &[set(4, &[1]), set(4, &[2]), set(4, &[3, 4])]);
        assert!(alg.contains(&set(4, &[2, 3, 4])));
        assert!(!alg.contains(&set(4, &[3])));
    }

    #[test]
    fn from_family_rejects_open_families() {
        let s = ScaledSpace::plain(3, vec![]).unwrap();
        let fam = vec![s.empty(), s.full(), set(3, &[1])];
        assert!(matches!(SetAlgebra::from_family(&s, &fam), Err(Error::NotClosed)));
        let fam = vec![s.empty(), s.full(), set(3, &[1]), set(3, &[2, 3])];
        assert_eq!(SetAlgebra::from_family(&s, &fam).unwrap().atom_count(), 2);
    }

    #[test]
    fn tails_must_be_unbounded() {
        assert!(ScaledSpace::new(3, vec![set(3, &[1])], set(3, &[1, 2])).is_err());
        let s = ScaledSpace::new(3, vec![set(3, &[1])], set(3, &[2])).unwrap();
        assert_eq!(s.points_at_infinity(), set(3, &[3]));
    }

    #[test]
    fn scale_closure_and_bornology() {
        let s = ScaledSpace::plain(4, vec![set(4, &[1, 2]), set(4, &[3])]).unwrap();
        assert_eq!(s.scale_elements().unwrap().len(), 4);
        assert!(!s.is_bornology().unwrap());
        let b = ScaledSpace::plain(4, vec![set(4, &[1]), set(4, &[2])]).unwrap();
        assert!(b.is_bornology().unwrap());
    }

    fn path(n: u32) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|k| (k, k + 1)).collect();
        Graph::from_edges(n as usize, &edges, 0).unwrap()
    }

    #[test]
    fn induced_on_a_path() {
        let s = ScaledSpace::plain(5, vec![set(5, &[3])]).unwrap();
        let ind = induced_algebra(&s, &path(5)).unwrap();
        assert!(ind.representatives.contains(&set(5, &[1, 2])));
        assert!(ind.representatives.contains(&set(5, &[4, 5])));
        assert!(ind.algebra.contains(&set(5, &[1, 2])));
        // with B = ∅ only, the path is one component
        let trivial = ScaledSpace::plain(5, vec![]).unwrap();
        let ind = induced_algebra(&trivial, &path(5)).unwrap();
        assert_eq!(ind.representatives, vec![trivial.empty(), trivial.full()]);
    }

    #[test]
    fn induced_on_a_complete_graph() {
        let n = 5u32;
        let edges: Vec<_> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        let g = Graph::from_edges(n as usize, &edges, 0).unwrap();
        let s = ScaledSpace::plain(5, vec![set(5, &[3]), set(5, &[5])]).unwrap();
        let ind = induced_algebra(&s, &g).unwrap();
        assert_eq!(ind.representatives, vec![s.empty(), set(5, &[1, 2, 4])]);
    }
}
