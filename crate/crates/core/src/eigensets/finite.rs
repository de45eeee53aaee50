//! Star operators on finite scaled algebras and the algebra of their
//! eigensets.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::bitset::PointSet;
use crate::error::{Error, Result};
use crate::scaled_ba::{mod_equiv, SetAlgebra};

/// Star against a cover by algebra elements, each bounded or disjoint from
/// the bounded hull, so bounded sets stay bounded.
#[derive(Clone, Debug)]
pub struct FiniteStar {
    cover: Vec<PointSet>,
}

impl FiniteStar {
    pub fn new(algebra: &SetAlgebra, cover: Vec<PointSet>) -> Result<Self> {
        let space = algebra.space();
        let mut union = space.empty();
        for u in &cover {
            if !algebra.contains(u) {
                return Err(Error::InvalidCover(format!("{u:?} is not an algebra element")));
            }
            if !space.is_bounded(u) && u.intersects(space.bounded_hull()) {
                return Err(Error::InvalidCover(format!("{u:?} mixes bounded and unbounded points")));
            }
            union.union_with(u);
        }
        if union != space.full() {
            return Err(Error::InvalidCover("cover misses points".into()));
        }
        Ok(Self { cover })
    }

    /// Random cover: bounded and unbounded atoms are grouped separately into
    /// blocks, and a few unions of blocks are added on top.
    pub fn random(algebra: &SetAlgebra, rng: &mut impl Rng) -> Self {
        let space = algebra.space();
        let mut blocks = Vec::new();
        for bounded in [true, false] {
            let mut atoms: Vec<&PointSet> = algebra
                .atoms()
                .iter()
                .filter(|a| space.is_bounded(a) == bounded)
                .collect();
            atoms.shuffle(rng);
            let mut current = space.empty();
            for a in atoms {
                current.union_with(a);
                if rng.gen_bool(0.5) {
                    blocks.push(std::mem::replace(&mut current, space.empty()));
                }
            }
            if !current.is_empty() {
                blocks.push(current);
            }
        }
        let extra = rng.gen_range(0..=2);
        let mut cover = blocks.clone();
        for _ in 0..extra {
            if blocks.len() >= 2 {
                let i = rng.gen_range(0..blocks.len());
                let j = rng.gen_range(0..blocks.len());
                let same_side = space.is_bounded(&blocks[i]) == space.is_bounded(&blocks[j]);
                if same_side {
                    cover.push(blocks[i].union(&blocks[j]));
                }
            }
        }
        Self { cover }
    }

    pub fn cover(&self) -> &[PointSet] {
        &self.cover
    }

    pub fn apply(&self, a: &PointSet) -> PointSet {
        let mut out = PointSet::empty(a.universe());
        for u in self.cover.iter().filter(|u| u.intersects(a)) {
            out.union_with(u);
        }
        out
    }
}

pub fn is_finite_eigenset(a: &PointSet, algebra: &SetAlgebra, ops: &[FiniteStar]) -> bool {
    let space = algebra.space();
    let complement = a.complement();
    ops.iter()
        .all(|f| mod_equiv(&f.apply(a), a, space) && mod_equiv(&f.apply(&complement), &complement, space))
}

/// Eigensets of the operators among the algebra's elements. Fails with
/// `NotClosed` if they do not form an algebra.
pub fn eigenset_algebra(algebra: &SetAlgebra, ops: &[FiniteStar]) -> Result<SetAlgebra> {
    let family: Vec<PointSet> = algebra
        .elements()?
        .into_iter()
        .filter(|a| is_finite_eigenset(a, algebra, ops))
        .collect();
    SetAlgebra::from_family(algebra.space(), &family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaled_ba::{generate_algebra, is_compact_at_infinity, ScaledSpace};

    fn set(n: usize, pts: &[usize]) -> PointSet {
        PointSet::from_iter(n, pts.iter().copied())
    }

    #[test]
    fn star_eigensets_form_a_coarser_algebra() {
        let s = ScaledSpace::plain(5, vec![set(5, &[0])]).unwrap();
        let singles: Vec<_> = (0..5).map(|p| set(5, &[p])).collect();
        let alg = generate_algebra(&singles, &s);
        let star = FiniteStar::new(&alg, vec![set(5, &[0]), set(5, &[1, 2]), set(5, &[3]), set(5, &[4])]).unwrap();
        let eig = eigenset_algebra(&alg, &[star]).unwrap();
        assert_eq!(
            eig.atoms(),
            &[set(5, &[0]), set(5, &[1, 2]), set(5, &[3]), set(5, &[4])]
        );
        assert!(is_compact_at_infinity(&eig).compact);
    }

    #[test]
    fn covers_must_respect_boundedness() {
        let s = ScaledSpace::plain(3, vec![set(3, &[0])]).unwrap();
        let alg = generate_algebra(&[set(3, &[1])], &s);
        assert!(FiniteStar::new(&alg, vec![set(3, &[0, 1]), set(3, &[2])]).is_err());
        assert!(FiniteStar::new(&alg, vec![set(3, &[0])]).is_err());
        assert!(FiniteStar::new(&alg, vec![set(3, &[0]), set(3, &[1, 2])]).is_ok());
    }
}
