use proptest::prelude::*;

use endslab::ends::{decompose, default_radii};
use endslab::graph::{Graph, Horizon, VertexId};
use endslab::oracles;
use endslab::scaled_ba::{
    compactify, complement_equiv_check, enumerate_ends, generate_algebra, is_compact_at_infinity, is_hausdorff,
    mod_equiv, EndTag, ScaledSpace, SetAlgebra,
};
use endslab::PointSet;

fn set(n: usize, mask: u16) -> PointSet {
    PointSet::from_iter(n, (0..n).filter(|&i| mask >> i & 1 == 1))
}

#[derive(Clone, Debug)]
struct Case {
    n: usize,
    scale: Vec<u16>,
    tails: u16,
    gens: Vec<u16>,
}

impl Case {
    fn space(&self) -> ScaledSpace {
        let scale: Vec<PointSet> = self.scale.iter().map(|&m| set(self.n, m)).collect();
        let hull = self.scale.iter().fold(0, |a, &m| a | m);
        ScaledSpace::new(self.n, scale, set(self.n, self.tails & !hull)).unwrap()
    }

    fn algebra(&self) -> SetAlgebra {
        let gens: Vec<PointSet> = self.gens.iter().map(|&m| set(self.n, m)).collect();
        generate_algebra(&gens, &self.space())
    }
}

fn case() -> impl Strategy<Value = Case> {
    (1usize..=8).prop_flat_map(|n| {
        let mask = 0u16..(1 << n);
        (
            Just(n),
            prop::collection::vec(mask.clone(), 0..=3),
            mask.clone(),
            prop::collection::vec(mask, 0..=3),
        )
            .prop_map(|(n, scale, tails, gens)| Case { n, scale, tails, gens })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mod_equivalence_is_an_equivalence(c in case(), a in any::<u16>(), b in any::<u16>(), d in any::<u16>()) {
        let space = c.space();
        let (a, b, d) = (set(c.n, a), set(c.n, b), set(c.n, d));
        prop_assert!(mod_equiv(&a, &a, &space));
        prop_assert_eq!(mod_equiv(&a, &b, &space), mod_equiv(&b, &a, &space));
        if mod_equiv(&a, &b, &space) && mod_equiv(&b, &d, &space) {
            prop_assert!(mod_equiv(&a, &d, &space));
        }
        prop_assert_eq!(mod_equiv(&a, &b, &space), oracles::brute_mod_equiv(&a, &b, &space).unwrap());
        if mod_equiv(&a, &b, &space) {
            prop_assert!(complement_equiv_check(&a, &b, &space));
        }
    }

    #[test]
    fn atoms_partition_and_generate(c in case()) {
        let alg = c.algebra();
        let mut union = PointSet::empty(c.n);
        for (i, a) in alg.atoms().iter().enumerate() {
            prop_assert!(!a.is_empty());
            prop_assert!(!a.intersects(&union), "atom {} overlaps", i);
            union.union_with(a);
        }
        prop_assert_eq!(union, c.space().full());
        for &g in &c.gens {
            prop_assert!(alg.contains(&set(c.n, g)));
        }
        prop_assert_eq!(alg.element_count(), 1u128 << alg.atom_count());
    }

    #[test]
    fn generated_algebra_is_the_closure(c in case()) {
        let alg = c.algebra();
        let gens: Vec<PointSet> = c.gens.iter().map(|&m| set(c.n, m)).collect();
        let fix: Vec<PointSet> = oracles::closure_fixpoint(&gens, &c.space()).unwrap().into_iter().collect();
        let mut elems = alg.elements().unwrap();
        elems.sort();
        prop_assert_eq!(&elems, &fix);
        prop_assert_eq!(oracles::closure_elements(&alg).unwrap(), fix);
    }

    #[test]
    fn bitset_laws(n in 1usize..130, a in prop::collection::vec(any::<bool>(), 130), b in prop::collection::vec(any::<bool>(), 130)) {
        let a = PointSet::from_iter(n, (0..n).filter(|&i| a[i]));
        let b = PointSet::from_iter(n, (0..n).filter(|&i| b[i]));
        prop_assert_eq!(a.union(&b).complement(), a.complement().intersection(&b.complement()));
        prop_assert_eq!(a.symmetric_difference(&b), a.difference(&b).union(&b.difference(&a)));
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert_eq!(a.len() + a.complement().len(), n);
        prop_assert_eq!(a.is_disjoint(&b), !a.intersects(&b));
        prop_assert!(a.intersection(&b).is_subset(&a));
    }

    #[test]
    fn ends_are_the_unbounded_atoms(c in case()) {
        let alg = c.algebra();
        let ends = enumerate_ends(&alg);
        prop_assert_eq!(ends.len(), alg.unbounded_atoms().len());
        prop_assert_eq!(oracles::ends_as_families(&alg).unwrap(), oracles::intersection_ends(&alg).unwrap());
    }

    #[test]
    fn compactness_and_external_ends(c in case()) {
        let alg = c.algebra();
        let compact = is_compact_at_infinity(&alg).compact;
        let ends = enumerate_ends(&alg);
        if compact {
            prop_assert!(ends.iter().all(|e| e.tag == EndTag::Internal));
        }
        if ends.is_empty() {
            prop_assert!(compact);
        }
        prop_assert_eq!(compact, oracles::brute_compact(&alg).unwrap());
    }

    #[test]
    fn hausdorff_compactification_verifies(c in case()) {
        let alg = c.algebra();
        prop_assume!(is_hausdorff(&alg));
        let comp = compactify(&alg).unwrap();
        prop_assert!(comp.verified);
        prop_assert!(comp.checks.isomorphism && comp.checks.closure_meets && comp.checks.compact);
        prop_assert!(comp.checks.no_external_ends);
        let external = enumerate_ends(&alg).iter().filter(|e| e.tag == EndTag::External).count();
        prop_assert_eq!(comp.added.len(), external);
        prop_assert!(is_compact_at_infinity(&comp.algebra).compact);
    }
}

/// Random connected graph: a random tree on `n` vertices plus extra edges.
fn random_graph() -> impl Strategy<Value = Graph> {
    (2usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<prop::sample::Index>(), n - 1),
            prop::collection::vec((0..n, 0..n), 0..=n / 3),
        )
            .prop_map(move |(parents, extra)| {
                let mut edges: Vec<(VertexId, VertexId)> = parents
                    .iter()
                    .enumerate()
                    .map(|(i, p)| ((i + 1) as VertexId, p.index(i + 1) as VertexId))
                    .collect();
                edges.extend(
                    extra
                        .into_iter()
                        .filter(|(a, b)| a != b)
                        .map(|(a, b)| (a as VertexId, b as VertexId)),
                );
                for e in edges.iter_mut() {
                    *e = (e.0.min(e.1), e.0.max(e.1));
                }
                edges.sort_unstable();
                edges.dedup();
                Graph::from_edges(n, &edges, 0).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decomposition_matches_union_find(g in random_graph(), r in 3u32..9) {
        let h = Horizon::with_radius(r).unwrap();
        let radii = default_radii(&h, None);
        let dec = decompose(&g, &h, &radii).unwrap();
        prop_assert_eq!(dec.counts(), oracles::brute_counts(&g, &h, &radii));
        prop_assert!(oracles::refinement_violations(&g, &h, &radii).is_empty());
        for n in 1..dec.depth() {
            for (i, _) in dec.level(n).unbounded() {
                prop_assert!(dec.parent(n, i).is_some());
            }
        }
    }
}
