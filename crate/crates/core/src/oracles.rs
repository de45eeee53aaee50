//! Brute-force reference computations, kept independent of the fast paths
//! they are compared against.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use crate::bitset::{PointSet, VertexSet};
use crate::error::{Error, Result};
use crate::graph::{Graph, Horizon, PresetKind, Space, VertexId};
use crate::scaled_ba::{EndTag, ScaledSpace, SetAlgebra};

/// `C ≡ D` iff `C Δ D` lies inside some union of scale generators.
pub fn brute_mod_equiv(c: &PointSet, d: &PointSet, space: &ScaledSpace) -> Result<bool> {
    let diff = c.symmetric_difference(d);
    Ok(space.scale_elements()?.iter().any(|b| diff.is_subset(b)))
}

pub fn brute_bounded(set: &PointSet, space: &ScaledSpace) -> Result<bool> {
    Ok(space.scale_elements()?.iter().any(|b| set.is_subset(b)))
}

/// Every element of the algebra, by closing the atoms under union, with no
/// use of the atom masks.
pub fn closure_elements(algebra: &SetAlgebra) -> Result<Vec<PointSet>> {
    let n = algebra.space().universe();
    let mut seen: BTreeSet<PointSet> = BTreeSet::from([PointSet::empty(n)]);
    let mut queue: VecDeque<PointSet> = VecDeque::from([PointSet::empty(n)]);
    while let Some(s) = queue.pop_front() {
        for a in algebra.atoms() {
            let t = s.union(a);
            if seen.insert(t.clone()) {
                if seen.len() > 1 << 16 {
                    return Err(Error::TooLarge("more than 65536 elements".into()));
                }
                queue.push_back(t);
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// Smallest family of subsets containing `generators` and the scale
/// generators, closed under complement and pairwise union.
pub fn closure_fixpoint(generators: &[PointSet], space: &ScaledSpace) -> Result<BTreeSet<PointSet>> {
    let mut family: BTreeSet<PointSet> = BTreeSet::from([space.empty(), space.full()]);
    family.extend(generators.iter().cloned());
    family.extend(space.generators().iter().cloned());
    loop {
        let current: Vec<PointSet> = family.iter().cloned().collect();
        let mut grew = false;
        for a in &current {
            grew |= family.insert(a.complement());
            for b in &current {
                grew |= family.insert(a.union(b));
            }
            if family.len() > 1 << 12 {
                return Err(Error::TooLarge("closure exceeds 4096 sets".into()));
            }
        }
        if !grew {
            return Ok(family);
        }
    }
}

/// An end as its full member family, with the tag read off the
/// intersection of the members.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BruteEnd {
    pub members: Vec<PointSet>,
    pub tag: EndTag,
}

fn tag_of(members: &[PointSet], space: &ScaledSpace) -> EndTag {
    let mut meet = space.full();
    for m in members {
        meet.intersect_with(m);
    }
    if meet.difference(space.tails()).is_empty() {
        EndTag::External
    } else {
        EndTag::Internal
    }
}

/// A family of unbounded elements has the finite intersection property iff
/// its total intersection is unbounded, since unboundedness passes to
/// supersets. Maximal such families are the ends.
fn maximal(family: &[usize], unbounded: &[PointSet], space: &ScaledSpace) -> bool {
    let mut meet = space.full();
    for &i in family {
        meet.intersect_with(&unbounded[i]);
    }
    (0..unbounded.len())
        .filter(|i| !family.contains(i))
        .all(|i| space.is_bounded(&meet.intersection(&unbounded[i])))
}

const SUBFAMILY_LIMIT: usize = 16;
const INTERSECTION_LIMIT: usize = 256;

/// Walks every subfamily of unbounded elements; algebras of at most 16
/// elements.
pub fn subfamily_ends(algebra: &SetAlgebra) -> Result<Vec<BruteEnd>> {
    let space = algebra.space();
    let elements = closure_elements(algebra)?;
    if elements.len() > SUBFAMILY_LIMIT {
        return Err(Error::TooLarge(format!(
            "{} elements for the subfamily oracle",
            elements.len()
        )));
    }
    let unbounded: Vec<PointSet> = elements.into_iter().filter(|e| !space.is_bounded(e)).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << unbounded.len()) {
        let family: Vec<usize> = (0..unbounded.len()).filter(|i| mask >> i & 1 == 1).collect();
        let mut meet = space.full();
        for &i in &family {
            meet.intersect_with(&unbounded[i]);
        }
        if space.is_bounded(&meet) || !maximal(&family, &unbounded, space) {
            continue;
        }
        let members: Vec<PointSet> = family.iter().map(|&i| unbounded[i].clone()).collect();
        out.push(BruteEnd {
            tag: tag_of(&members, space),
            members,
        });
    }
    out.sort();
    Ok(out)
}

/// For each unbounded element `E`, the family of elements meeting `E` in an
/// unbounded set; those that are maximal with unbounded intersection are the
/// ends. Algebras of at most 256 elements.
pub fn intersection_ends(algebra: &SetAlgebra) -> Result<Vec<BruteEnd>> {
    let space = algebra.space();
    let elements = closure_elements(algebra)?;
    if elements.len() > INTERSECTION_LIMIT {
        return Err(Error::TooLarge(format!(
            "{} elements for the intersection oracle",
            elements.len()
        )));
    }
    let unbounded: Vec<PointSet> = elements.into_iter().filter(|e| !space.is_bounded(e)).collect();
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    for e in &unbounded {
        let family: Vec<usize> = (0..unbounded.len())
            .filter(|&i| !space.is_bounded(&unbounded[i].intersection(e)))
            .collect();
        let mut meet = space.full();
        for &i in &family {
            meet.intersect_with(&unbounded[i]);
        }
        if !space.is_bounded(&meet) && maximal(&family, &unbounded, space) {
            found.insert(family);
        }
    }
    let mut out: Vec<BruteEnd> = found
        .into_iter()
        .map(|family| {
            let members: Vec<PointSet> = family.iter().map(|&i| unbounded[i].clone()).collect();
            BruteEnd {
                tag: tag_of(&members, space),
                members,
            }
        })
        .collect();
    out.sort();
    Ok(out)
}

/// Compact at infinity: every element containing the points at infinity
/// (unions of a cover are elements) leaves a bounded remainder.
pub fn brute_compact(algebra: &SetAlgebra) -> Result<bool> {
    let space = algebra.space();
    let infinity = space.points_at_infinity();
    Ok(closure_elements(algebra)?
        .iter()
        .filter(|v| infinity.is_subset(v))
        .all(|v| space.is_bounded(&v.complement())))
}

/// Each point at infinity is the intersection of the elements containing it,
/// tail points aside.
pub fn brute_hausdorff(algebra: &SetAlgebra) -> Result<bool> {
    let space = algebra.space();
    let elements = closure_elements(algebra)?;
    Ok(space.points_at_infinity().iter().all(|x| {
        let mut meet = space.full();
        for e in elements.iter().filter(|e| e.contains(x)) {
            meet.intersect_with(e);
        }
        meet.difference(space.tails()).to_vec() == vec![x]
    }))
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Components of the subgraph induced on `region`, by union-find over edges,
/// sorted by least vertex.
pub fn union_find_components(graph: &Graph, region: &VertexSet) -> Vec<VertexSet> {
    let mut uf = UnionFind::new(graph.vertex_count());
    for (u, v) in graph.edges() {
        if region.contains(u as usize) && region.contains(v as usize) {
            uf.union(u as usize, v as usize);
        }
    }
    let mut groups: BTreeMap<usize, VertexSet> = BTreeMap::new();
    for v in region.iter() {
        groups
            .entry(uf.find(v))
            .or_insert_with(|| VertexSet::empty(graph.vertex_count()))
            .insert(v);
    }
    let mut out: Vec<VertexSet> = groups.into_values().collect();
    out.sort_by_key(|c| c.first());
    out
}

fn touches_shell(graph: &Graph, set: &VertexSet, horizon: &Horizon) -> bool {
    set.iter().any(|v| {
        let d = graph.depth(v as VertexId);
        d >= horizon.shell_start() && d <= horizon.radius()
    })
}

/// Unbounded components of `ball(R) \ ball(<r)` for one radius.
pub fn unbounded_components(graph: &Graph, horizon: &Horizon, radius: u32) -> Vec<VertexSet> {
    let region = VertexSet::from_iter(
        graph.vertex_count(),
        (0..graph.vertex_count()).filter(|&v| {
            let d = graph.depth(v as VertexId);
            d >= radius && d <= horizon.radius()
        }),
    );
    union_find_components(graph, &region)
        .into_iter()
        .filter(|c| touches_shell(graph, c, horizon))
        .collect()
}

/// Unbounded component counts per radius.
pub fn brute_counts(graph: &Graph, horizon: &Horizon, radii: &[u32]) -> Vec<usize> {
    radii
        .iter()
        .map(|&r| unbounded_components(graph, horizon, r).len())
        .collect()
}

/// Number of unbounded components outside the open ball of radius `n` in a
/// free group of rank `k`: the reduced words of length `n`.
pub fn free_group_count(rank: usize, n: u32) -> usize {
    if n == 0 {
        return 1;
    }
    2 * rank * (2 * rank - 1).pow(n - 1)
}

/// For consecutive radii, every unbounded outer component meets exactly one
/// unbounded inner component and lies inside it. Returns the violations as
/// `(level, component)` pairs.
pub fn refinement_violations(graph: &Graph, horizon: &Horizon, radii: &[u32]) -> Vec<(usize, usize)> {
    let levels: Vec<Vec<VertexSet>> = radii.iter().map(|&r| unbounded_components(graph, horizon, r)).collect();
    let mut bad = Vec::new();
    for n in 1..levels.len() {
        for (i, child) in levels[n].iter().enumerate() {
            let hosts: Vec<&VertexSet> = levels[n - 1].iter().filter(|p| p.intersects(child)).collect();
            if hosts.len() != 1 || !child.is_subset(hosts[0]) {
                bad.push((n, i));
            }
        }
    }
    bad
}

/// Union of geodesics from `basepoint` to `a`, one breadth-first search per
/// target: `v` is on a geodesic to `t` iff `d(x0, v) + d(v, t) = d(x0, t)`.
pub fn brute_cone(graph: &Graph, horizon: &Horizon, a: &VertexSet, basepoint: VertexId) -> VertexSet {
    let from_base = graph.distances_from(
        horizon,
        &VertexSet::singleton(graph.vertex_count(), basepoint as usize),
        u32::MAX - 1,
    );
    let mut out = graph.empty_set();
    for t in a.iter() {
        let to_t = graph.distances_from(horizon, &VertexSet::singleton(graph.vertex_count(), t), u32::MAX - 1);
        let target = from_base[t];
        if target == u32::MAX {
            continue;
        }
        for v in 0..graph.vertex_count() {
            if from_base[v] != u32::MAX && to_t[v] != u32::MAX && from_base[v] + to_t[v] == target {
                out.insert(v);
            }
        }
    }
    out
}

/// Reference end counts for a space and radius list; `None` when the oracle
/// does not apply.
pub trait CountOracle: Send + Sync {
    fn name(&self) -> &str;
    fn counts(&self, space: &Space, radii: &[u32]) -> Option<Vec<usize>>;
}

/// Reference end enumeration for finite algebras.
pub trait EndsOracle: Send + Sync {
    fn name(&self) -> &str;
    fn ends(&self, algebra: &SetAlgebra) -> Result<Vec<BruteEnd>>;
}

struct UnionFindCounts;
struct FreeGroupClosedForm;
struct Subfamilies;
struct Intersections;

impl CountOracle for UnionFindCounts {
    fn name(&self) -> &str {
        "union-find"
    }
    fn counts(&self, space: &Space, radii: &[u32]) -> Option<Vec<usize>> {
        Some(brute_counts(space.graph(), &space.horizon(), radii))
    }
}

impl CountOracle for FreeGroupClosedForm {
    fn name(&self) -> &str {
        "free-group-closed-form"
    }
    fn counts(&self, space: &Space, radii: &[u32]) -> Option<Vec<usize>> {
        match space.cayley()?.preset().kind() {
            PresetKind::FreeGroup(k) => Some(radii.iter().map(|&r| free_group_count(*k, r)).collect()),
            _ => None,
        }
    }
}

impl EndsOracle for Subfamilies {
    fn name(&self) -> &str {
        "subfamilies"
    }
    fn ends(&self, algebra: &SetAlgebra) -> Result<Vec<BruteEnd>> {
        subfamily_ends(algebra)
    }
}

impl EndsOracle for Intersections {
    fn name(&self) -> &str {
        "intersections"
    }
    fn ends(&self, algebra: &SetAlgebra) -> Result<Vec<BruteEnd>> {
        intersection_ends(algebra)
    }
}

/// Reference oracles by name.
pub struct OracleSet {
    counts: BTreeMap<String, Arc<dyn CountOracle>>,
    ends: BTreeMap<String, Arc<dyn EndsOracle>>,
}

impl Default for OracleSet {
    fn default() -> Self {
        let mut set = Self {
            counts: BTreeMap::new(),
            ends: BTreeMap::new(),
        };
        set.register_counts(Arc::new(UnionFindCounts));
        set.register_counts(Arc::new(FreeGroupClosedForm));
        set.register_ends(Arc::new(Subfamilies));
        set.register_ends(Arc::new(Intersections));
        set
    }
}

impl OracleSet {
    pub fn register_counts(&mut self, o: Arc<dyn CountOracle>) {
        self.counts.insert(o.name().to_string(), o);
    }

    pub fn register_ends(&mut self, o: Arc<dyn EndsOracle>) {
        self.ends.insert(o.name().to_string(), o);
    }

    pub fn counts(&self) -> impl Iterator<Item = &Arc<dyn CountOracle>> {
        self.counts.values()
    }

    pub fn ends(&self) -> impl Iterator<Item = &Arc<dyn EndsOracle>> {
        self.ends.values()
    }

    pub fn ends_oracle(&self, name: &str) -> Result<Arc<dyn EndsOracle>> {
        self.ends.get(name).cloned().ok_or_else(|| Error::Unknown {
            kind: "ends oracle",
            name: name.to_string(),
        })
    }
}

/// The fast enumeration in the oracles' shape.
pub fn ends_as_families(algebra: &SetAlgebra) -> Result<Vec<BruteEnd>> {
    let mut out = crate::scaled_ba::enumerate_ends(algebra)
        .into_iter()
        .map(|e| {
            Ok(BruteEnd {
                members: e.members(algebra)?,
                tag: e.tag,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ends::decompose;
    use crate::graph::{build_truncated_cayley, GroupPreset};
    use crate::scaled_ba::{enumerate_ends, generate_algebra, is_compact_at_infinity, is_hausdorff, mod_equiv};

    fn set(n: usize, pts: &[usize]) -> PointSet {
        PointSet::from_iter(n, pts.iter().copied())
    }

    fn two_ends() -> SetAlgebra {
        let s = ScaledSpace::plain(4, vec![set(4, &[0]), set(4, &[1])]).unwrap();
        generate_algebra(&[set(4, &[2])], &s)
    }

    #[test]
    fn both_end_oracles_agree_with_the_atoms() {
        let alg = two_ends();
        let fast = ends_as_families(&alg).unwrap();
        assert_eq!(subfamily_ends(&alg).unwrap(), fast);
        assert_eq!(intersection_ends(&alg).unwrap(), fast);
        assert_eq!(fast.len(), enumerate_ends(&alg).len());
        assert!(fast.iter().all(|e| e.tag == EndTag::Internal));
    }

    #[test]
    fn external_ends_from_tails() {
        let s = ScaledSpace::new(3, vec![set(3, &[0])], set(3, &[1, 2])).unwrap();
        let alg = generate_algebra(&[set(3, &[1])], &s);
        let ends = intersection_ends(&alg).unwrap();
        assert_eq!(ends.len(), 2);
        assert!(ends.iter().all(|e| e.tag == EndTag::External));
        assert!(!brute_compact(&alg).unwrap());
        assert_eq!(is_compact_at_infinity(&alg).compact, brute_compact(&alg).unwrap());
    }

    #[test]
    fn closure_matches_atoms() {
        let alg = two_ends();
        let fix = closure_fixpoint(&[set(4, &[2])], alg.space()).unwrap();
        let all: BTreeSet<PointSet> = closure_elements(&alg).unwrap().into_iter().collect();
        assert_eq!(fix, all);
        assert_eq!(all.len(), 16);
    }

    #[test]
    fn equivalence_and_hausdorff() {
        let alg = two_ends();
        let s = alg.space();
        for (c, d) in [(set(4, &[0]), set(4, &[1])), (set(4, &[0]), set(4, &[2]))] {
            assert_eq!(mod_equiv(&c, &d, s), brute_mod_equiv(&c, &d, s).unwrap());
        }
        assert_eq!(is_hausdorff(&alg), brute_hausdorff(&alg).unwrap());
        let coarse = generate_algebra(&[], &ScaledSpace::plain(3, vec![set(3, &[0])]).unwrap());
        assert!(!brute_hausdorff(&coarse).unwrap());
        assert!(!is_hausdorff(&coarse));
    }

    #[test]
    fn counts_match_the_engine() {
        let c = build_truncated_cayley(&GroupPreset::free_group(2), Horizon::with_radius(8).unwrap()).unwrap();
        let space = Space::Group(c);
        let dec = decompose(space.graph(), &space.horizon(), &[1, 2, 3]).unwrap();
        for o in OracleSet::default().counts() {
            assert_eq!(o.counts(&space, &[1, 2, 3]), Some(dec.counts()), "{}", o.name());
        }
        assert!(refinement_violations(space.graph(), &space.horizon(), &[1, 2, 3]).is_empty());
    }

    #[test]
    fn cone_oracle_matches() {
        let c = build_truncated_cayley(&GroupPreset::free_abelian(2), Horizon::with_radius(6).unwrap()).unwrap();
        let g = c.graph();
        let h = c.horizon();
        let a = c.set_of(|w| w.exponent_sum(1) == 3 && w.exponent_sum(2).abs() <= 1);
        assert_eq!(crate::eigensets::cone(g, &h, &a, 0), brute_cone(g, &h, &a, 0));
    }
}
