//! Scaled groups over preset Cayley graphs: multiplication operators, the
//! star identity for translate covers, local boundedness, bounded geometry,
//! and actions on other spaces.

mod action;

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use serde::Serialize;

pub use action::{
    action_checks, end_comparison, induced_cover_comparison, same_eigensets_check, ActionBuilder, ActionChecks,
    ActionLaw, ActionOperator, ActionRegistry, ActionSpec, CoverComparison, EndComparison, EndSide, GroupAction,
    SameEigensets,
};

use crate::bitset::VertexSet;
use crate::eigensets::{is_eigenset, Operator, OperatorFamily, Status};
use crate::error::{Error, Result};
use crate::graph::{CayleyGraph, Letter, Space, VertexId, Word};

/// Three-valued answer for properties the horizon may not settle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tri {
    Yes,
    No,
    Undetermined,
}

impl Tri {
    pub fn as_str(self) -> &'static str {
        match self {
            Tri::Yes => "yes",
            Tri::No => "no",
            Tri::Undetermined => "undetermined",
        }
    }
}

/// Parses `e` or a string of generator letters, `A` being `a^-1`.
pub fn parse_word(text: &str, c: &CayleyGraph) -> Result<Word> {
    let text = text.trim();
    if text == "e" || text.is_empty() {
        return Ok(Word::identity());
    }
    let gens = c.preset().generators();
    let mut letters = Vec::with_capacity(text.len());
    for ch in text.chars() {
        if !ch.is_ascii_alphabetic() {
            return Err(Error::SetExpr(format!("bad letter `{ch}` in word `{text}`")));
        }
        let k = (ch.to_ascii_lowercase() as u8 - b'a' + 1) as Letter;
        let l = if ch.is_ascii_uppercase() { -k } else { k };
        if !gens.contains(&l) {
            return Err(Error::SetExpr(format!(
                "`{ch}` is not a generator of {}",
                c.preset().name()
            )));
        }
        letters.push(l);
    }
    Ok(c.preset().oracle().normalize(&letters))
}

fn max_len(words: &[Word]) -> u32 {
    words.iter().map(|w| w.len() as u32).max().unwrap_or(0)
}

/// A group with the scale of word-bounded sets, presented by a basis of
/// word balls.
#[derive(Clone, Debug)]
pub struct ScaledGroup {
    space: Arc<Space>,
    basis_radii: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProductCheck {
    pub left: u32,
    pub right: u32,
    /// Largest word length in `B1 · B2^-1`.
    pub product_radius: u32,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScaleCheck {
    pub products: Vec<ProductCheck>,
    pub covers: bool,
    pub holds: bool,
}

impl ScaledGroup {
    pub fn new(space: Arc<Space>, basis_radii: Vec<u32>) -> Result<Self> {
        space.require_group()?;
        if basis_radii.is_empty() {
            return Err(Error::Precondition("scale basis is empty".into()));
        }
        let r = space.horizon().radius();
        if let Some(&big) = basis_radii.iter().find(|&&b| b > r) {
            return Err(Error::BallExceedsHorizon {
                radius: big,
                horizon: r,
            });
        }
        Ok(Self { space, basis_radii })
    }

    /// Balls of radius 1 and 2.
    pub fn word_balls(space: Arc<Space>) -> Result<Self> {
        Self::new(space, vec![1, 2])
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn cayley(&self) -> &CayleyGraph {
        self.space.cayley().expect("checked on construction")
    }

    pub fn basis_radii(&self) -> &[u32] {
        &self.basis_radii
    }

    pub fn basis(&self) -> Vec<Vec<Word>> {
        self.basis_radii.iter().map(|&r| self.cayley().ball_words(r)).collect()
    }

    pub fn generators(&self) -> Vec<Word> {
        self.cayley()
            .preset()
            .generators()
            .into_iter()
            .map(|g| Word(vec![g]))
            .collect()
    }

    /// `B1 · B2^-1` lies in the ball of radius `r1 + r2` for basis pairs, and
    /// the basis contains the identity so its translates cover the group.
    pub fn scale_check(&self) -> ScaleCheck {
        let c = self.cayley();
        let basis = self.basis();
        let mut products = Vec::new();
        for (i, b1) in basis.iter().enumerate() {
            for (j, b2) in basis.iter().enumerate() {
                let inv: Vec<Word> = b2.iter().map(|w| c.inverse(w)).collect();
                let radius = b1
                    .iter()
                    .flat_map(|x| inv.iter().map(move |y| (x, y)))
                    .map(|(x, y)| c.multiply(x, y).len() as u32)
                    .max()
                    .unwrap_or(0);
                let (left, right) = (self.basis_radii[i], self.basis_radii[j]);
                products.push(ProductCheck {
                    left,
                    right,
                    product_radius: radius,
                    holds: radius <= left + right,
                });
            }
        }
        let covers = basis.iter().any(|b| b.contains(&Word::identity()));
        let holds = covers && products.iter().all(|p| p.holds);
        ScaleCheck {
            products,
            covers,
            holds,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// `A ↦ A · W` or `A ↦ W · A` for a finite set of words `W`.
pub struct MultiplyOperator {
    space: Arc<Space>,
    label: String,
    words: Vec<Word>,
    side: Side,
}

impl MultiplyOperator {
    pub fn new(space: Arc<Space>, label: impl Into<String>, words: Vec<Word>, side: Side) -> Result<Self> {
        space.require_group()?;
        Ok(Self {
            space,
            label: label.into(),
            words,
            side,
        })
    }
}

impl Operator for MultiplyOperator {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn apply(&self, a: &VertexSet) -> VertexSet {
        let c = self.space.cayley().expect("checked on construction");
        match self.side {
            Side::Right => c.right_product(a, &self.words),
            Side::Left => c.left_product(&self.words, a),
        }
    }

    fn safety_margin(&self) -> u32 {
        max_len(&self.words)
    }
}

/// Right and left multiplication by basis balls and by single generators.
#[derive(Clone, Debug)]
pub struct FourFamilies {
    pub rm_s: OperatorFamily,
    pub lm_s: OperatorFamily,
    pub rm_g: OperatorFamily,
    pub lm_g: OperatorFamily,
}

impl FourFamilies {
    pub fn all(&self) -> [&OperatorFamily; 4] {
        [&self.rm_s, &self.lm_s, &self.rm_g, &self.lm_g]
    }
}

pub fn four_families(group: &ScaledGroup) -> Result<FourFamilies> {
    let space = group.space().clone();
    let by_scale = |side: Side, tag: &str| -> Result<OperatorFamily> {
        let ops = group
            .basis_radii()
            .iter()
            .zip(group.basis())
            .map(|(r, ball)| {
                let op = MultiplyOperator::new(space.clone(), format!("{tag} ball({r})"), ball, side)?;
                Ok(Arc::new(op) as Arc<dyn Operator>)
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorFamily::new(tag, space.clone(), ops)
    };
    let by_generator = |side: Side, tag: &str| -> Result<OperatorFamily> {
        let ops = group
            .generators()
            .into_iter()
            .map(|g| {
                let op = MultiplyOperator::new(space.clone(), format!("{tag} {g}"), vec![g], side)?;
                Ok(Arc::new(op) as Arc<dyn Operator>)
            })
            .collect::<Result<Vec<_>>>()?;
        OperatorFamily::new(tag, space.clone(), ops)
    };
    Ok(FourFamilies {
        rm_s: by_scale(Side::Right, "rm_s")?,
        lm_s: by_scale(Side::Left, "lm_s")?,
        rm_g: by_generator(Side::Right, "rm_g")?,
        lm_g: by_generator(Side::Left, "lm_g")?,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DualityReport {
    /// `A` under left multiplication by the scale.
    pub left: Status,
    /// `A^-1` under right multiplication by the scale.
    pub right: Status,
    pub holds: bool,
}

/// Inversion swaps left and right multiplication, so `A` and `A^-1` get the
/// same verdict unless one of them is undetermined.
pub fn inversion_duality_check(group: &ScaledGroup, a: &VertexSet, slack: u32) -> Result<DualityReport> {
    let fam = four_families(group)?;
    let left = is_eigenset(a, &fam.lm_s, slack).status;
    let right = is_eigenset(&group.cayley().inverse_set(a), &fam.rm_s, slack).status;
    let holds = left == right || left == Status::Undetermined || right == Status::Undetermined;
    Ok(DualityReport { left, right, holds })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarIdentity {
    pub safe_radius: u32,
    /// `st(A, C_B) \ A` inside the safe zone.
    #[serde(serialize_with = "crate::bitset::serialize_members")]
    pub star_side: VertexSet,
    /// `B · B^-1 · A \ A` inside the safe zone.
    #[serde(serialize_with = "crate::bitset::serialize_members")]
    pub product_side: VertexSet,
    #[serde(serialize_with = "crate::bitset::serialize_members")]
    pub residue: VertexSet,
    pub holds: bool,
}

/// Compares the star of `A` against the cover by right translates `B · g`
/// with `B · B^-1 · A`, both outside `A`, inside `ball(R - 2|B|)`. `A` is
/// taken as the finite set it describes inside the truncation.
pub fn star_identity_check(group: &ScaledGroup, a: &VertexSet, b: &[Word]) -> Result<StarIdentity> {
    let c = group.cayley();
    let graph = c.graph();
    let horizon = c.horizon();
    if b.is_empty() {
        return Err(Error::Precondition("the scale element B is empty".into()));
    }
    let len_b = max_len(b);
    let safe = horizon
        .radius()
        .checked_sub(2 * len_b)
        .ok_or_else(|| Error::HorizonTooSmall(format!("R = {} < 2|B| = {}", horizon.radius(), 2 * len_b)))?;
    let zone = graph.depth_at_most(safe);
    let a = a.intersection(&graph.truncated(&horizon));

    // every translate meeting the safe zone has |g| <= |B| + safe
    let mut star = graph.empty_set();
    let reach = horizon.radius() - len_b;
    let mut translate = Vec::with_capacity(b.len());
    for g in (0..c.vertex_count() as VertexId).filter(|&g| c.length(g) <= reach) {
        translate.clear();
        translate.extend(b.iter().filter_map(|x| c.left_mul(x, g)));
        if translate.iter().any(|&v| a.contains(v as usize)) {
            for &v in &translate {
                star.insert(v as usize);
            }
        }
    }

    let mut shifts: BTreeSet<Word> = BTreeSet::new();
    for x in b {
        for y in b {
            shifts.insert(c.multiply(x, &c.inverse(y)));
        }
    }
    let shifts: Vec<Word> = shifts.into_iter().collect();
    let product = c.left_product(&shifts, &a);

    let mut star_side = star.difference(&a);
    star_side.intersect_with(&zone);
    let mut product_side = product.difference(&a);
    product_side.intersect_with(&zone);
    let residue = star_side.symmetric_difference(&product_side);
    Ok(StarIdentity {
        safe_radius: safe,
        holds: residue.is_empty(),
        star_side,
        product_side,
        residue,
    })
}

/// Vertices of the subgroup generated by `gens`, found by closing the
/// identity under the generators without leaving the truncation.
pub fn generated_subgroup(c: &CayleyGraph, gens: &[Word]) -> (VertexSet, bool) {
    let mut moves: Vec<Word> = gens.to_vec();
    moves.extend(gens.iter().map(|g| c.inverse(g)));
    let start = c.vertex_of(&Word::identity()).expect("identity is the basepoint");
    let mut seen = c.graph().empty_set();
    seen.insert(start as usize);
    let mut queue = VecDeque::from([start]);
    let mut escaped = false;
    while let Some(v) = queue.pop_front() {
        for m in &moves {
            match c.right_mul(v, m) {
                Some(u) => {
                    if !seen.contains(u as usize) {
                        seen.insert(u as usize);
                        queue.push_back(u);
                    }
                }
                None => escaped = true,
            }
        }
    }
    (seen, escaped)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LocalBoundedness {
    pub verdict: Tri,
    /// Largest word length seen in the generated subgroup.
    pub reach: u32,
    pub elements_seen: usize,
}

/// Is the subgroup generated by `b` bounded? Yes if it closes up inside
/// `ball(R/2)`, no if it reaches the shell.
pub fn locally_bounded(group: &ScaledGroup, b: &[Word]) -> LocalBoundedness {
    let c = group.cayley();
    let horizon = c.horizon();
    let (sub, escaped) = generated_subgroup(c, b);
    let reach = c.graph().reach(&sub).unwrap_or(0);
    let verdict = if escaped || reach >= horizon.shell_start() {
        Tri::No
    } else if reach <= horizon.radius() / 2 {
        Tri::Yes
    } else {
        Tri::Undetermined
    };
    LocalBoundedness {
        verdict,
        reach,
        elements_seen: sub.len(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TranslateCover {
    pub radius: u32,
    pub size: usize,
    pub translates: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundedGeometry {
    pub k_radius: u32,
    pub samples: Vec<TranslateCover>,
    pub verdict: Tri,
}

/// Covers sampled balls by left translates `g · K` of `K = ball(k)`,
/// greedily placing each translate on the first uncovered point.
pub fn bounded_geometry(group: &ScaledGroup, k: u32, sample_radii: &[u32]) -> BoundedGeometry {
    let c = group.cayley();
    let graph = c.graph();
    let r = c.horizon().radius();
    let kball = c.ball_words(k);
    let mut samples = Vec::new();
    let mut complete = true;
    for &radius in sample_radii.iter().filter(|&&s| s + k <= r) {
        let target = graph.depth_at_most(radius);
        let mut covered = graph.empty_set();
        let mut translates = 0;
        for g in target.iter() {
            if covered.contains(g) {
                continue;
            }
            translates += 1;
            for y in &kball {
                if let Some(v) = c.right_mul(g as VertexId, y) {
                    covered.insert(v as usize);
                }
            }
        }
        complete &= target.is_subset(&covered);
        samples.push(TranslateCover {
            radius,
            size: target.len(),
            translates,
        });
    }
    let verdict = match (samples.is_empty(), complete) {
        (true, _) => Tri::Undetermined,
        (false, true) => Tri::Yes,
        (false, false) => Tri::No,
    };
    BoundedGeometry {
        k_radius: k,
        samples,
        verdict,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SubgroupScale {
    pub products: Vec<ProductCheck>,
    pub holds: bool,
}

/// The scale of `G` restricted to the subgroup generated by `gens`:
/// `(H ∩ B1) · (H ∩ B2)^-1` lands in `H ∩ ball(r1 + r2)` for basis pairs.
pub fn subgroup_scale_check(group: &ScaledGroup, gens: &[Word]) -> SubgroupScale {
    let c = group.cayley();
    let (sub, _) = generated_subgroup(c, gens);
    let words_in = |r: u32| -> Vec<Word> {
        sub.iter()
            .filter(|&v| c.length(v as VertexId) <= r)
            .map(|v| c.element(v as VertexId).clone())
            .collect()
    };
    let mut products = Vec::new();
    for &r1 in group.basis_radii() {
        for &r2 in group.basis_radii() {
            let (b1, b2) = (words_in(r1), words_in(r2));
            let mut radius = 0;
            let mut inside = true;
            for x in &b1 {
                for y in &b2 {
                    let p = c.multiply(x, &c.inverse(y));
                    radius = radius.max(p.len() as u32);
                    inside &= c.vertex_of(&p).is_some_and(|v| sub.contains(v as usize));
                }
            }
            products.push(ProductCheck {
                left: r1,
                right: r2,
                product_radius: radius,
                holds: inside && radius <= r1 + r2,
            });
        }
    }
    let holds = products.iter().all(|p| p.holds);
    SubgroupScale { products, holds }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_truncated_cayley, GroupPreset, Horizon};

    pub(crate) fn group(p: GroupPreset, r: u32) -> ScaledGroup {
        let c = build_truncated_cayley(&p, Horizon::with_radius(r).unwrap()).unwrap();
        ScaledGroup::word_balls(Arc::new(Space::Group(c))).unwrap()
    }

    fn ints(g: &ScaledGroup, set: &VertexSet) -> Vec<i64> {
        let mut v: Vec<i64> = set
            .iter()
            .map(|x| g.cayley().element(x as VertexId).exponent_sum(1))
            .collect();
        v.sort();
        v
    }

    fn line(g: &ScaledGroup, lo: i64, hi: i64) -> VertexSet {
        g.cayley().set_of(|w| (lo..=hi).contains(&w.exponent_sum(1)))
    }

    #[test]
    fn word_ball_scales_are_closed() {
        for p in [
            GroupPreset::free_abelian(1),
            GroupPreset::free_abelian(2),
            GroupPreset::free_group(2),
        ] {
            let g = group(p, 6);
            let check = g.scale_check();
            assert!(check.holds, "{check:?}");
            assert_eq!(check.products.len(), 4);
        }
    }

    #[test]
    fn multiplication_families_on_the_line() {
        let g = group(GroupPreset::free_abelian(1), 40);
        let fam = four_families(&g).unwrap();
        let ray = line(&g, 0, 40);
        for f in fam.all() {
            assert_eq!(is_eigenset(&ray, f, 2).status, Status::Eigenset, "{}", f.name());
        }
        let left = is_eigenset(&ray, &fam.lm_g, 2);
        let right = is_eigenset(&ray, &fam.rm_g, 2);
        for (l, r) in left.operators.iter().zip(&right.operators) {
            assert_eq!(l.residue, r.residue);
        }
    }

    #[test]
    fn branches_absorb_right_multiplication() {
        let g = group(GroupPreset::free_group(2), 8);
        let c = g.cayley();
        let branch = c.set_of(|w| w.letters().first() == Some(&1));
        let fam = four_families(&g).unwrap();
        assert_eq!(is_eigenset(&branch, &fam.rm_s, 2).status, Status::Eigenset);
        assert_eq!(is_eigenset(&branch, &fam.lm_s, 2).status, Status::NotEigenset);
        let d = inversion_duality_check(&g, &branch, 2).unwrap();
        assert!(d.holds);
        assert_eq!((d.left, d.right), (Status::NotEigenset, Status::NotEigenset));
        let d = inversion_duality_check(&g, &c.inverse_set(&branch), 2).unwrap();
        assert_eq!((d.left, d.right), (Status::Eigenset, Status::Eigenset));
    }

    #[test]
    fn duality_on_the_line() {
        let g = group(GroupPreset::free_abelian(1), 30);
        let d = inversion_duality_check(&g, &line(&g, 0, 30), 2).unwrap();
        assert_eq!((d.left, d.right, d.holds), (Status::Eigenset, Status::Eigenset, true));
        let d = inversion_duality_check(&g, &g.cayley().graph().empty_set(), 2).unwrap();
        assert!(d.holds);
    }

    #[test]
    fn star_identity_on_an_interval() {
        let g = group(GroupPreset::free_abelian(1), 40);
        let c = g.cayley();
        let b: Vec<Word> = ["A", "e", "a"].iter().map(|s| parse_word(s, c).unwrap()).collect();
        let s = star_identity_check(&g, &line(&g, 0, 20), &b).unwrap();
        assert!(s.holds);
        assert_eq!(s.safe_radius, 38);
        assert_eq!(ints(&g, &s.star_side), vec![-2, -1, 21, 22]);
        assert_eq!(ints(&g, &s.product_side), vec![-2, -1, 21, 22]);
        let empty = star_identity_check(&g, &c.graph().empty_set(), &b).unwrap();
        assert!(empty.holds && empty.star_side.is_empty());
    }

    #[test]
    fn star_identity_on_a_free_branch() {
        let g = group(GroupPreset::free_group(2), 7);
        let c = g.cayley();
        let branch = c.set_of(|w| w.letters().first() == Some(&1));
        let s = star_identity_check(&g, &branch, &c.ball_words(1)).unwrap();
        assert!(s.holds);
        assert!(!s.star_side.is_empty());
        let big = c.ball_words(4);
        assert!(matches!(
            star_identity_check(&g, &branch, &big),
            Err(Error::HorizonTooSmall(_))
        ));
    }

    #[test]
    fn local_boundedness() {
        let g = group(GroupPreset::free_abelian(1), 20);
        let a = vec![parse_word("a", g.cayley()).unwrap()];
        assert_eq!(locally_bounded(&g, &a).verdict, Tri::No);
        assert_eq!(locally_bounded(&g, &[Word::identity()]).verdict, Tri::Yes);
    }

    #[test]
    fn bounded_geometry_of_presets() {
        for p in [
            GroupPreset::free_abelian(1),
            GroupPreset::free_abelian(2),
            GroupPreset::free_group(2),
        ] {
            let g = group(p, 6);
            let bg = bounded_geometry(&g, 1, &[1, 2, 3]);
            assert_eq!(bg.verdict, Tri::Yes);
            assert_eq!(bg.samples[0].translates, 1);
            assert!(bg.samples.iter().all(|s| s.translates <= s.size));
        }
    }

    #[test]
    fn subgroup_scales() {
        let z = group(GroupPreset::free_abelian(1), 12);
        let evens = vec![parse_word("aa", z.cayley()).unwrap()];
        assert!(subgroup_scale_check(&z, &evens).holds);
        let f = group(GroupPreset::free_group(2), 6);
        let cyclic = vec![parse_word("a", f.cayley()).unwrap()];
        assert!(subgroup_scale_check(&f, &cyclic).holds);
        let (sub, escaped) = generated_subgroup(f.cayley(), &cyclic);
        assert_eq!(sub.len(), 13);
        assert!(escaped);
    }

    #[test]
    fn words_parse_to_normal_forms() {
        let g = group(GroupPreset::free_group(2), 3);
        assert_eq!(parse_word("aA", g.cayley()).unwrap(), Word::identity());
        assert_eq!(parse_word("abB", g.cayley()).unwrap(), Word(vec![1]));
        assert!(parse_word("c", g.cayley()).is_err());
    }
}
