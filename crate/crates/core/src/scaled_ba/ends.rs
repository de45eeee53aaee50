use serde::Serialize;

use super::SetAlgebra;
use crate::bitset::PointSet;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EndTag {
    Internal,
    External,
}

/// An end of a finite algebra: all elements containing one unbounded atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct End {
    pub atom: PointSet,
    /// Intersection of the members, tail points removed.
    pub core: PointSet,
    pub tag: EndTag,
}

impl End {
    pub fn is_member(&self, element: &PointSet) -> bool {
        self.atom.is_subset(element)
    }

    /// Members in canonical order; fails when the algebra is too large to list.
    pub fn members(&self, algebra: &SetAlgebra) -> Result<Vec<PointSet>> {
        Ok(algebra.elements()?.into_iter().filter(|e| self.is_member(e)).collect())
    }
}

pub fn enumerate_ends(algebra: &SetAlgebra) -> Vec<End> {
    let tails = algebra.space().tails();
    algebra
        .unbounded_atoms()
        .into_iter()
        .map(|i| {
            let atom = algebra.atoms()[i].clone();
            let core = atom.difference(tails);
            let tag = if core.is_empty() {
                EndTag::External
            } else {
                EndTag::Internal
            };
            End { atom, core, tag }
        })
        .collect()
}

/// Points at infinity whose atom holds other non-tail points.
pub fn hausdorff_violations(algebra: &SetAlgebra) -> Vec<usize> {
    let tails = algebra.space().tails();
    algebra
        .space()
        .points_at_infinity()
        .iter()
        .filter(|&x| algebra.atoms()[algebra.atom_of(x)].difference(tails).len() != 1)
        .collect()
}

pub fn is_hausdorff(algebra: &SetAlgebra) -> bool {
    hausdorff_violations(algebra).is_empty()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Compactness {
    pub compact: bool,
    /// A family covering every point at infinity whose union misses an
    /// unbounded set, when not compact.
    pub witness: Option<Vec<PointSet>>,
}

/// A cover of the points at infinity fails only when it misses an unbounded
/// atom; the atoms meeting the points at infinity are the worst cover.
pub fn is_compact_at_infinity(algebra: &SetAlgebra) -> Compactness {
    let infinity = algebra.space().points_at_infinity();
    let compact = algebra
        .unbounded_atoms()
        .into_iter()
        .all(|i| algebra.atoms()[i].intersects(&infinity));
    let witness = (!compact).then(|| {
        algebra
            .atoms()
            .iter()
            .filter(|a| a.intersects(&infinity))
            .cloned()
            .collect()
    });
    Compactness { compact, witness }
}

/// The trace algebra on a closed `y` is compact at infinity whenever the
/// parent is.
pub fn subalgebra_compactness_check(parent: &SetAlgebra, y: &PointSet) -> Result<bool> {
    if !parent.contains(y) {
        return Err(Error::NotClosed);
    }
    if !is_compact_at_infinity(parent).compact {
        return Err(Error::Precondition("parent algebra is not compact at infinity".into()));
    }
    let (sub, _) = parent.restrict(y);
    Ok(is_compact_at_infinity(&sub).compact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaled_ba::tests::set;
    use crate::scaled_ba::{generate_algebra, ScaledSpace};

    fn powerset(space: &ScaledSpace) -> SetAlgebra {
        let singletons: Vec<_> = (0..space.universe())
            .map(|p| PointSet::singleton(space.universe(), p))
            .collect();
        generate_algebra(&singletons, space)
    }

    #[test]
    fn bounded_algebra_has_no_ends() {
        let s = ScaledSpace::plain(3, vec![set(3, &[1, 2, 3])]).unwrap();
        assert!(enumerate_ends(&powerset(&s)).is_empty());
    }

    #[test]
    fn two_internal_ends() {
        let s = ScaledSpace::plain(4, vec![set(4, &[1]), set(4, &[2])]).unwrap();
        let alg = powerset(&s);
        let ends = enumerate_ends(&alg);
        assert_eq!(ends.len(), 2);
        assert_eq!(ends[0].core, set(4, &[3]));
        assert_eq!(ends[1].core, set(4, &[4]));
        assert!(ends.iter().all(|e| e.tag == EndTag::Internal));
        assert_eq!(ends[0].members(&alg).unwrap().len(), 8);
        assert!(is_compact_at_infinity(&alg).compact);
        assert!(is_hausdorff(&alg));
    }

    #[test]
    fn trivial_algebra_has_the_whole_space_as_an_end() {
        let s = ScaledSpace::plain(4, vec![]).unwrap();
        let alg = generate_algebra(&[], &s);
        let ends = enumerate_ends(&alg);
        assert_eq!(ends.len(), 1);
        assert_eq!(ends[0].members(&alg).unwrap(), vec![s.full()]);
        assert!(!is_hausdorff(&alg));
    }

    #[test]
    fn tail_atom_breaks_compactness() {
        let s = ScaledSpace::new(4, vec![set(4, &[1])], set(4, &[3])).unwrap();
        let alg = powerset(&s);
        let c = is_compact_at_infinity(&alg);
        assert!(!c.compact);
        assert_eq!(c.witness.unwrap(), vec![set(4, &[2]), set(4, &[4])]);
        let ends = enumerate_ends(&alg);
        assert_eq!(ends.iter().filter(|e| e.tag == EndTag::External).count(), 1);
    }

    #[test]
    fn compact_without_points_at_infinity() {
        let s = ScaledSpace::plain(3, vec![set(3, &[1, 2, 3])]).unwrap();
        assert!(is_compact_at_infinity(&powerset(&s)).compact);
    }

    #[test]
    fn closed_subspaces_stay_compact() {
        let s = ScaledSpace::plain(4, vec![set(4, &[1]), set(4, &[2])]).unwrap();
        let alg = powerset(&s);
        assert!(subalgebra_compactness_check(&alg, &s.full()).unwrap());
        assert!(subalgebra_compactness_check(&alg, &set(4, &[2, 3])).unwrap());
        let coarse = generate_algebra(&[set(4, &[1, 2])], &ScaledSpace::plain(4, vec![]).unwrap());
        assert!(matches!(
            subalgebra_compactness_check(&coarse, &set(4, &[1])),
            Err(Error::NotClosed)
        ));
    }
}
