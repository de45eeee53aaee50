use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{enumerate_ends, generate_algebra, is_compact_at_infinity, is_hausdorff};
use super::{End, EndTag, ScaledSpace, SetAlgebra};
use crate::bitset::PointSet;
use crate::error::{Error, Result};

/// Exhaustive identity checks run up to this many atoms, sampled beyond.
const EXHAUSTIVE_ATOMS: usize = 6;
const SAMPLES: usize = 64;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CompactifyChecks {
    /// `A ↦ Ā` preserves unions, intersections and complements and
    /// restricts back to `A`.
    pub isomorphism: bool,
    /// `cl(A₁ ∩ A₂) = cl(A₁) ∩ cl(A₂)` with `cl(A) = Ā`.
    pub closure_meets: bool,
    /// Distinct added points have distinct neighbourhood families.
    pub distinct_ends: bool,
    /// `B̄ = B` for every scale generator.
    pub scale_fixed: bool,
    pub compact: bool,
    pub no_external_ends: bool,
    pub hausdorff: bool,
}

impl CompactifyChecks {
    fn failures(&self, include_hausdorff: bool) -> Vec<&'static str> {
        let mut out = Vec::new();
        for (ok, name) in [
            (self.isomorphism, "isomorphism"),
            (self.closure_meets, "closure_meets"),
            (self.distinct_ends, "distinct_ends"),
            (self.scale_fixed, "scale_fixed"),
            (self.compact, "compact"),
            (self.no_external_ends, "no_external_ends"),
        ] {
            if !ok {
                out.push(name);
            }
        }
        if include_hausdorff && !self.hausdorff {
            out.push("hausdorff");
        }
        out
    }
}

/// `X ∪ ExtEnds(X)`; the external end `added[i]` is the point `n + i`.
#[derive(Clone, Debug)]
pub struct Compactification {
    pub space: ScaledSpace,
    pub algebra: SetAlgebra,
    pub added: Vec<End>,
    /// False when the input was not Hausdorff; the result is then only
    /// explored, not guaranteed.
    pub verified: bool,
    pub checks: CompactifyChecks,
    base: usize,
}

impl Compactification {
    pub fn original_universe(&self) -> usize {
        self.base
    }

    /// `Ā = A ∪ {V ∈ ExtEnds : A ∈ V}`.
    pub fn bar(&self, a: &PointSet) -> PointSet {
        bar(a, &self.added, self.base)
    }

    /// Points of `Ā` that are added ends.
    pub fn added_in(&self, a: &PointSet) -> Vec<usize> {
        self.bar(a)
            .iter()
            .filter(|&p| p >= self.base)
            .map(|p| p - self.base)
            .collect()
    }

    /// An element meeting the added points also meets the original universe.
    pub fn validate_condition2(&self) -> bool {
        let original = PointSet::from_iter(self.space.universe(), 0..self.base);
        self.algebra
            .atoms()
            .iter()
            .all(|a| a.iter().all(|p| p < self.base) || a.intersects(&original))
    }
}

fn bar(a: &PointSet, added: &[End], base: usize) -> PointSet {
    let mut out = a.widen(base + added.len());
    for (i, e) in added.iter().enumerate() {
        if e.is_member(a) {
            out.insert(base + i);
        }
    }
    out
}

fn sample_elements(algebra: &SetAlgebra) -> Vec<PointSet> {
    let k = algebra.atom_count();
    if k <= EXHAUSTIVE_ATOMS {
        return algebra.elements().expect("small algebra lists");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0ffee);
    (0..SAMPLES)
        .map(|_| {
            let size = rng.gen_range(0..=k);
            let mut out = algebra.space().empty();
            for i in sample(&mut rng, k, size).iter() {
                out.union_with(&algebra.atoms()[i]);
            }
            out
        })
        .collect()
}

pub fn compactify(algebra: &SetAlgebra) -> Result<Compactification> {
    let space = algebra.space();
    let base = space.universe();
    let added: Vec<End> = enumerate_ends(algebra)
        .into_iter()
        .filter(|e| e.tag == EndTag::External)
        .collect();
    let total = base + added.len();
    let widened_space = ScaledSpace::new(
        total,
        space.generators().iter().map(|g| g.widen(total)).collect(),
        space.tails().widen(total),
    )?;
    let bar_atoms: Vec<PointSet> = algebra.atoms().iter().map(|a| bar(a, &added, base)).collect();
    let extended = generate_algebra(&bar_atoms, &widened_space);

    let original = PointSet::from_iter(total, 0..base);
    let mut covered = PointSet::empty(total);
    let mut disjoint = true;
    for b in &bar_atoms {
        disjoint &= b.is_disjoint(&covered);
        covered.union_with(b);
    }
    let mut sorted_bar = bar_atoms.clone();
    sorted_bar.sort();
    let mut isomorphism = disjoint
        && covered.len() == total
        && extended.atoms() == sorted_bar.as_slice()
        && algebra
            .atoms()
            .iter()
            .zip(&bar_atoms)
            .all(|(a, b)| b.intersection(&original) == a.widen(total));
    let mut closure_meets = true;
    let sample = sample_elements(algebra);
    let full_bar = PointSet::full(total);
    for x in &sample {
        let bx = bar(x, &added, base);
        isomorphism &= bar(&x.complement(), &added, base) == full_bar.difference(&bx);
        for y in &sample {
            let by = bar(y, &added, base);
            isomorphism &= bar(&x.union(y), &added, base) == bx.union(&by);
            closure_meets &= bar(&x.intersection(y), &added, base) == bx.intersection(&by);
        }
    }
    let added_atoms: Vec<usize> = (0..added.len()).map(|i| extended.atom_of(base + i)).collect();
    let mut distinct = added_atoms.clone();
    distinct.sort_unstable();
    distinct.dedup();
    let checks = CompactifyChecks {
        isomorphism,
        closure_meets,
        distinct_ends: distinct.len() == added_atoms.len(),
        scale_fixed: space
            .generators()
            .iter()
            .all(|g| bar(g, &added, base) == g.widen(total)),
        compact: is_compact_at_infinity(&extended).compact,
        no_external_ends: enumerate_ends(&extended).iter().all(|e| e.tag == EndTag::Internal),
        hausdorff: is_hausdorff(&extended),
    };
    let verified = is_hausdorff(algebra);
    let failures = checks.failures(verified);
    if !failures.is_empty() {
        return Err(Error::Verification(format!(
            "compactification failed: {}",
            failures.join(", ")
        )));
    }
    Ok(Compactification {
        space: widened_space,
        algebra: extended,
        added,
        verified,
        checks,
        base,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scaled_ba::tests::set;

    #[test]
    fn no_external_ends_means_identity() {
        let s = ScaledSpace::plain(4, vec![set(4, &[1]), set(4, &[2])]).unwrap();
        let alg = generate_algebra(&[set(4, &[3])], &s);
        let c = compactify(&alg).unwrap();
        assert!(c.added.is_empty());
        assert_eq!(c.space.universe(), 4);
        assert_eq!(c.algebra.atoms(), alg.atoms());
    }

    #[test]
    fn tails_become_ends() {
        // 1 bounded, 2 and 3 tails of two separate rays, 4 a point at infinity
        let s = ScaledSpace::new(4, vec![set(4, &[1])], set(4, &[2, 3])).unwrap();
        let alg = generate_algebra(&[set(4, &[2]), set(4, &[3])], &s);
        assert!(!is_compact_at_infinity(&alg).compact);
        let c = compactify(&alg).unwrap();
        assert_eq!(c.added.len(), 2);
        assert!(c.verified);
        assert!(c.checks.compact && c.checks.no_external_ends);
        assert_eq!(c.added_in(&set(4, &[2])), vec![0]);
        assert_eq!(c.added_in(&set(4, &[1, 3])), vec![1]);
        assert!(c.validate_condition2());
    }

    #[test]
    fn non_hausdorff_input_is_flagged() {
        let s = ScaledSpace::new(4, vec![], set(4, &[1])).unwrap();
        let alg = generate_algebra(&[set(4, &[1])], &s);
        assert!(!is_hausdorff(&alg));
        let c = compactify(&alg).unwrap();
        assert!(!c.verified);
        assert_eq!(c.added.len(), 1);
    }
}
