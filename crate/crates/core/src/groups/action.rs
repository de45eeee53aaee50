//! Subgroups of a preset group acting on its Cayley graph.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::Serialize;

use super::{four_families, generated_subgroup, max_len, parse_word, ScaledGroup, Tri};
use crate::bitset::VertexSet;
use crate::eigensets::{is_eigenset, Operator, OperatorFamily, Status};
use crate::ends::LevelDecomposition;
use crate::error::{Error, Result};
use crate::graph::{Space, VertexId, Word};
use crate::scaled_ba::{generate_algebra, graph_algebra_adapter};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionLaw {
    /// `h · x = hx`
    Left,
    /// `h · x = x h^-1`
    RightInverse,
    /// `h · x = x`
    Fixed,
}

/// The subgroup `H` generated by `generators` acting on the group's own
/// Cayley graph. `H` carries the restriction of the group's scale.
#[derive(Clone, Debug)]
pub struct GroupAction {
    name: String,
    group: ScaledGroup,
    generators: Vec<Word>,
    law: ActionLaw,
}

impl GroupAction {
    pub fn new(name: impl Into<String>, group: ScaledGroup, generators: Vec<Word>, law: ActionLaw) -> Self {
        Self {
            name: name.into(),
            group,
            generators,
            law,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group(&self) -> &ScaledGroup {
        &self.group
    }

    pub fn target(&self) -> &Arc<Space> {
        self.group.space()
    }

    pub fn generators(&self) -> &[Word] {
        &self.generators
    }

    pub fn law(&self) -> ActionLaw {
        self.law
    }

    pub fn act(&self, h: &Word, x: &Word) -> Word {
        let c = self.group.cayley();
        match self.law {
            ActionLaw::Left => c.multiply(h, x),
            ActionLaw::RightInverse => c.multiply(x, &c.inverse(h)),
            ActionLaw::Fixed => x.clone(),
        }
    }

    pub fn act_vertex(&self, h: &Word, v: VertexId) -> Option<VertexId> {
        let c = self.group.cayley();
        match self.law {
            ActionLaw::Left => c.left_mul(h, v),
            ActionLaw::RightInverse => c.right_mul(v, &c.inverse(h)),
            ActionLaw::Fixed => Some(v),
        }
    }

    pub fn act_set(&self, hs: &[Word], a: &VertexSet) -> VertexSet {
        let mut out = self.group.cayley().graph().empty_set();
        for v in a.iter() {
            for h in hs {
                if let Some(u) = self.act_vertex(h, v as VertexId) {
                    out.insert(u as usize);
                }
            }
        }
        out
    }

    /// Elements of `H` of ambient word length at most `r`, shortest first.
    pub fn elements(&self, r: u32) -> Vec<Word> {
        let c = self.group.cayley();
        let (sub, _) = generated_subgroup(c, &self.generators);
        let mut v: Vec<Word> = sub
            .iter()
            .filter(|&x| c.length(x as VertexId) <= r)
            .map(|x| c.element(x as VertexId).clone())
            .collect();
        v.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        v
    }

    /// `act(gh, x) = act(g, act(h, x))` over short `g`, `h` and `x`.
    pub fn law_holds(&self) -> bool {
        let c = self.group.cayley();
        let hs = self.elements(2);
        let xs = c.ball_words(2);
        hs.iter().all(|g| {
            hs.iter().all(|h| {
                let gh = c.multiply(g, h);
                xs.iter().all(|x| self.act(&gh, x) == self.act(g, &self.act(h, x)))
            })
        })
    }

    /// `B · K` stays in `ball(r + k)` for basis balls `B` of `H` and `K = ball(k)`.
    pub fn images_bounded(&self) -> bool {
        let c = self.group.cayley();
        self.group.basis_radii().iter().all(|&r| {
            let hs = self.elements(r);
            (0..=2).all(|k| {
                c.ball_words(k)
                    .iter()
                    .all(|x| hs.iter().all(|h| self.act(h, x).len() as u32 <= r + k))
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StabilizerSample {
    pub k: u32,
    pub size: usize,
    /// Largest word length of `h` with `h · ball(k)` meeting `ball(k)`.
    pub radius: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ActionChecks {
    pub law_holds: bool,
    pub images_bounded: bool,
    pub cobounded: Tri,
    /// Radius of a ball `K0` whose orbit covers the safe part of the truncation.
    pub k0_radius: Option<u32>,
    /// Largest distance to the orbit of the identity, inside `ball(R/2)` and
    /// inside `ball(R - shell)`.
    pub orbit_gap: [u32; 2],
    pub proper: Tri,
    pub stabilizers: Vec<StabilizerSample>,
}

/// Coboundedness from the distance to the orbit of the identity: bounded
/// and stable towards the horizon, or growing at least half as fast as the
/// radius. Properness from the stabilizers of small balls.
pub fn action_checks(action: &GroupAction) -> ActionChecks {
    let c = action.group.cayley();
    let graph = c.graph();
    let horizon = c.horizon();
    let r = horizon.radius();
    let hs = action.elements(r);
    let origin = c.vertex_of(&Word::identity()).expect("identity is the basepoint");

    let mut orbit = graph.empty_set();
    for h in &hs {
        if let Some(v) = action.act_vertex(h, origin) {
            orbit.insert(v as usize);
        }
    }
    let dist = graph.distances_from(&horizon, &orbit, 2 * r + 1);
    let gap = |rho: u32| {
        graph
            .depth_at_most(rho)
            .iter()
            .map(|v| dist[v].min(2 * r + 1))
            .max()
            .unwrap_or(0)
    };
    let (mid, outer) = (r / 2, r - horizon.shell_width());
    let (d_mid, d_outer) = (gap(mid), gap(outer));
    let cobounded = if d_mid <= r / 4 && d_outer <= d_mid {
        Tri::Yes
    } else if d_mid > r / 4 && 2 * d_outer.saturating_sub(d_mid) >= outer.saturating_sub(mid) {
        Tri::No
    } else {
        Tri::Undetermined
    };

    let mut stabilizers = Vec::new();
    for k in (0..=2).filter(|k| 2 * k <= r) {
        let ball: Vec<VertexId> = graph.depth_at_most(k).iter().map(|v| v as VertexId).collect();
        let hits: Vec<&Word> = hs
            .iter()
            .filter(|h| {
                ball.iter()
                    .any(|&y| action.act_vertex(h, y).is_some_and(|u| c.length(u) <= k))
            })
            .collect();
        stabilizers.push(StabilizerSample {
            k,
            size: hits.len(),
            radius: hits.iter().map(|h| h.len() as u32).max().unwrap_or(0),
        });
    }
    let worst = stabilizers.iter().map(|s| s.radius).max().unwrap_or(0);
    let proper = if worst >= horizon.shell_start() {
        Tri::No
    } else if worst <= r / 2 {
        Tri::Yes
    } else {
        Tri::Undetermined
    };

    ActionChecks {
        law_holds: action.law_holds(),
        images_bounded: action.images_bounded(),
        cobounded,
        k0_radius: (cobounded == Tri::Yes).then_some(d_mid),
        orbit_gap: [d_mid, d_outer],
        proper,
        stabilizers,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverComparison {
    pub safe_radius: u32,
    /// `B'`: elements `h` with `h · B` meeting `B`.
    pub stabilizer_size: usize,
    pub stabilizer_radius: u32,
    /// Whether the translates of `B` cover the safe zone.
    pub covers: bool,
    pub sampled: usize,
    pub refinement_failures: usize,
    pub orbit_map_failures: usize,
    pub holds: bool,
}

const COVER_SAMPLES: usize = 200;

/// For a proper cobounded action and a bounded `B`, every star
/// `st(hB, C_B)` lies in `h · B' · B`, and the orbit map of the identity
/// sends `g · B_H` to `g · (B_H · e)`.
pub fn induced_cover_comparison(action: &GroupAction, b: &[Word]) -> Result<CoverComparison> {
    let checks = action_checks(action);
    if checks.proper != Tri::Yes || checks.cobounded != Tri::Yes {
        return Err(Error::Precondition(format!(
            "action `{}` must be proper and cobounded (proper: {}, cobounded: {})",
            action.name,
            checks.proper.as_str(),
            checks.cobounded.as_str()
        )));
    }
    if b.is_empty() {
        return Err(Error::Precondition("B is empty".into()));
    }
    let c = action.group.cayley();
    let r = c.horizon().radius();
    let len_b = max_len(b);
    let safe = r
        .checked_sub(2 * len_b)
        .ok_or_else(|| Error::HorizonTooSmall(format!("R = {r} < 2|B| = {}", 2 * len_b)))?;

    // translates h'B with |h'| <= safe + 2|B| are all that can meet hB for |h| <= safe
    let hs = action.elements(r);
    let mut index: HashMap<Word, Vec<usize>> = HashMap::new();
    let images: Vec<Vec<Word>> = hs
        .iter()
        .map(|h| b.iter().map(|x| action.act(h, x)).collect())
        .collect();
    for (i, img) in images.iter().enumerate() {
        for p in img {
            index.entry(p.clone()).or_default().push(i);
        }
    }
    let meeting =
        |set: &[Word]| -> BTreeSet<usize> { set.iter().filter_map(|p| index.get(p)).flatten().copied().collect() };
    let stabilizer: Vec<&Word> = meeting(b).into_iter().map(|i| &hs[i]).collect();
    let stabilizer_radius = stabilizer.iter().map(|h| h.len() as u32).max().unwrap_or(0);
    let mut inflated: BTreeSet<Word> = BTreeSet::new();
    for s in &stabilizer {
        for x in b {
            inflated.insert(action.act(s, x));
        }
    }

    let centers: Vec<usize> = (0..hs.len()).filter(|&i| hs[i].len() as u32 <= safe).collect();
    let step = centers.len().div_ceil(COVER_SAMPLES).max(1);
    let sample: Vec<usize> = centers.iter().step_by(step).copied().collect();
    let mut refinement_failures = 0;
    for &i in &sample {
        let h = &hs[i];
        let target: BTreeSet<Word> = inflated.iter().map(|q| action.act(h, q)).collect();
        let star_ok = meeting(&images[i])
            .into_iter()
            .all(|j| images[j].iter().all(|p| target.contains(p)));
        if !star_ok {
            refinement_failures += 1;
        }
    }

    let mut orbit_map_failures = 0;
    let e = Word::identity();
    for &rb in action.group.basis_radii() {
        let basis = action.elements(rb);
        for &i in &sample {
            let g = &hs[i];
            let direct: BTreeSet<Word> = basis.iter().map(|x| action.act(&c.multiply(g, x), &e)).collect();
            let composed: BTreeSet<Word> = basis.iter().map(|x| action.act(g, &action.act(x, &e))).collect();
            if direct != composed {
                orbit_map_failures += 1;
            }
        }
    }

    let mut covered = c.graph().empty_set();
    for img in &images {
        for p in img {
            if let Some(v) = c.vertex_of(p) {
                covered.insert(v as usize);
            }
        }
    }
    let covers = c.graph().depth_at_most(safe).is_subset(&covered);

    Ok(CoverComparison {
        safe_radius: safe,
        stabilizer_size: stabilizer.len(),
        stabilizer_radius,
        covers,
        sampled: sample.len(),
        refinement_failures,
        orbit_map_failures,
        holds: refinement_failures == 0 && orbit_map_failures == 0,
    })
}

/// `A ↦ W · A` through the action.
pub struct ActionOperator {
    action: Arc<GroupAction>,
    label: String,
    elements: Vec<Word>,
}

impl Operator for ActionOperator {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn apply(&self, a: &VertexSet) -> VertexSet {
        self.action.act_set(&self.elements, a)
    }

    fn safety_margin(&self) -> u32 {
        match self.action.law {
            ActionLaw::Fixed => 0,
            _ => max_len(&self.elements),
        }
    }
}

impl GroupAction {
    /// `m_h` for each `h` in `H ∩ ball(2)`.
    pub fn element_family(self: &Arc<Self>) -> Result<OperatorFamily> {
        let ops = self
            .elements(2)
            .into_iter()
            .map(|h| {
                Arc::new(ActionOperator {
                    action: self.clone(),
                    label: format!("act {h}"),
                    elements: vec![h],
                }) as Arc<dyn Operator>
            })
            .collect();
        OperatorFamily::new(format!("{}/elements", self.name), self.target().clone(), ops)
    }

    /// `m_B` for each basis ball `B` of `H`.
    pub fn scale_family(self: &Arc<Self>) -> Result<OperatorFamily> {
        let ops = self
            .group
            .basis_radii()
            .iter()
            .map(|&r| {
                Arc::new(ActionOperator {
                    action: self.clone(),
                    label: format!("act H∩ball({r})"),
                    elements: self.elements(r),
                }) as Arc<dyn Operator>
            })
            .collect();
        OperatorFamily::new(format!("{}/scale", self.name), self.target().clone(), ops)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SameEigensets {
    pub per_element: Status,
    pub per_scale: Status,
    pub holds: bool,
}

/// Acting by single elements and by scale sets gives the same verdict on
/// `a` unless one side is undetermined.
pub fn same_eigensets_check(action: &Arc<GroupAction>, a: &VertexSet, slack: u32) -> Result<SameEigensets> {
    let per_element = is_eigenset(a, &action.element_family()?, slack).status;
    let per_scale = is_eigenset(a, &action.scale_family()?, slack).status;
    Ok(SameEigensets {
        per_element,
        per_scale,
        holds: per_element == per_scale || per_element == Status::Undetermined || per_scale == Status::Undetermined,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndSide {
    pub family: String,
    pub candidates: usize,
    pub eigensets: usize,
    pub undetermined: usize,
    pub ends: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EndComparison {
    pub level: usize,
    pub engine_count: usize,
    pub group_side: EndSide,
    pub space_side: EndSide,
    pub agree: bool,
}

/// Ends seen through eigensets: the unbounded components of one level and
/// their inverses are judged under the group's left scale multiplication
/// and under the action's scale family; the candidates found to be
/// eigensets generate an algebra on the level's truncation whose unbounded
/// atoms are counted. No agreement is asserted.
pub fn end_comparison(
    action: &Arc<GroupAction>,
    dec: &LevelDecomposition,
    level: usize,
    slack: u32,
) -> Result<EndComparison> {
    let adapter = graph_algebra_adapter(dec, level)?;
    let c = action.group.cayley();
    let lv = dec.level(level - 1);
    let mut candidates: BTreeSet<VertexSet> = BTreeSet::new();
    for (_, comp) in lv.unbounded() {
        candidates.insert(comp.vertices.clone());
        candidates.insert(c.inverse_set(&comp.vertices));
    }
    let side = |family: OperatorFamily| -> EndSide {
        let mut eigen = Vec::new();
        let mut undetermined = 0;
        for set in &candidates {
            match is_eigenset(set, &family, slack).status {
                Status::Eigenset => eigen.push(adapter.to_local(set)),
                Status::Undetermined => undetermined += 1,
                Status::NotEigenset => {}
            }
        }
        let algebra = generate_algebra(&eigen, &adapter.space);
        EndSide {
            family: family.name().to_string(),
            candidates: candidates.len(),
            eigensets: eigen.len(),
            undetermined,
            ends: algebra.unbounded_atoms().len(),
        }
    };
    let group_side = side(four_families(&action.group)?.lm_s);
    let space_side = side(action.scale_family()?);
    Ok(EndComparison {
        level,
        engine_count: lv.unbounded_count(),
        agree: group_side.ends == space_side.ends,
        group_side,
        space_side,
    })
}

/// Builds a named action of a subgroup on the group's Cayley graph.
pub trait ActionBuilder: Send + Sync {
    fn name(&self) -> &str;
    fn summary(&self) -> &str;
    fn build(&self, group: &ScaledGroup) -> Result<GroupAction>;
}

struct Builtin {
    name: &'static str,
    summary: &'static str,
    law: ActionLaw,
    generators: fn(&ScaledGroup) -> Vec<Word>,
}

impl ActionBuilder for Builtin {
    fn name(&self) -> &str {
        self.name
    }

    fn summary(&self) -> &str {
        self.summary
    }

    fn build(&self, group: &ScaledGroup) -> Result<GroupAction> {
        Ok(GroupAction::new(
            self.name,
            group.clone(),
            (self.generators)(group),
            self.law,
        ))
    }
}

fn all_generators(g: &ScaledGroup) -> Vec<Word> {
    g.generators()
}

fn squares(g: &ScaledGroup) -> Vec<Word> {
    g.cayley()
        .preset()
        .generators()
        .into_iter()
        .filter(|&l| l > 0)
        .map(|l| Word(vec![l, l]))
        .collect()
}

fn first_generator(_: &ScaledGroup) -> Vec<Word> {
    vec![Word(vec![1])]
}

fn no_generators(_: &ScaledGroup) -> Vec<Word> {
    Vec::new()
}

/// Actions by name. `custom:<name>` resolves to `<name>`.
pub struct ActionRegistry {
    entries: BTreeMap<String, Arc<dyn ActionBuilder>>,
}

impl Default for ActionRegistry {
    fn default() -> Self {
        let mut reg = Self {
            entries: BTreeMap::new(),
        };
        let builtins = [
            Builtin {
                name: "left-mult",
                summary: "the group acting on itself by left multiplication",
                law: ActionLaw::Left,
                generators: all_generators,
            },
            Builtin {
                name: "translation",
                summary: "the group acting on itself by x ↦ x h^-1",
                law: ActionLaw::RightInverse,
                generators: all_generators,
            },
            Builtin {
                name: "even-subgroup",
                summary: "the subgroup generated by squares of generators, by left multiplication",
                law: ActionLaw::Left,
                generators: squares,
            },
            Builtin {
                name: "cyclic-subgroup",
                summary: "the subgroup generated by the first generator, by left multiplication",
                law: ActionLaw::Left,
                generators: first_generator,
            },
            Builtin {
                name: "trivial",
                summary: "the trivial group",
                law: ActionLaw::Left,
                generators: no_generators,
            },
            Builtin {
                name: "identity",
                summary: "the whole group fixing every point",
                law: ActionLaw::Fixed,
                generators: all_generators,
            },
        ];
        for b in builtins {
            reg.register(Arc::new(b));
        }
        reg
    }
}

impl ActionRegistry {
    pub fn register(&mut self, builder: Arc<dyn ActionBuilder>) {
        self.entries.insert(builder.name().to_string(), builder);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ActionBuilder>> {
        let key = name.strip_prefix("custom:").unwrap_or(name);
        self.entries.get(key).cloned().ok_or_else(|| Error::Unknown {
            kind: "action",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn build(&self, name: &str, group: &ScaledGroup) -> Result<GroupAction> {
        self.get(name)?.build(group)
    }
}

/// Action file:
///
/// ```text
/// group Z
/// target Z            # optional, must equal the group
/// action left-mult    # or translation, even-subgroup, custom:<name>, ...
/// subgroup aa         # optional generator words overriding the action's
/// ```
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSpec {
    pub group: String,
    pub action: String,
    pub subgroup: Option<Vec<String>>,
}

impl ActionSpec {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_string(),
            line,
            msg,
        };
        let (mut group, mut target, mut action, mut subgroup) = (None, None, None, None);
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let rest = rest.trim().to_string();
            if rest.is_empty() {
                return Err(err(i + 1, format!("`{key}` needs a value")));
            }
            match key {
                "group" => group = Some((i + 1, rest)),
                "target" => target = Some((i + 1, rest)),
                "action" => action = Some(rest),
                "subgroup" => subgroup = Some(rest.split_whitespace().map(str::to_string).collect()),
                other => return Err(err(i + 1, format!("unknown directive `{other}`"))),
            }
        }
        let (_, group) = group.ok_or_else(|| err(0, "missing `group` line".into()))?;
        if let Some((line, t)) = target {
            if t != group {
                return Err(err(line, format!("target `{t}` differs from group `{group}`")));
            }
        }
        Ok(Self {
            group,
            action: action.unwrap_or_else(|| "left-mult".into()),
            subgroup,
        })
    }

    pub fn build(&self, group: &ScaledGroup, registry: &ActionRegistry) -> Result<GroupAction> {
        let action = registry.build(&self.action, group)?;
        match &self.subgroup {
            None => Ok(action),
            Some(words) => {
                let gens = words
                    .iter()
                    .map(|w| parse_word(w, group.cayley()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(GroupAction::new(action.name, action.group, gens, action.law))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ends::decompose;
    use crate::graph::GroupPreset;
    use crate::groups::tests::group;

    fn action(p: GroupPreset, r: u32, name: &str) -> Arc<GroupAction> {
        Arc::new(ActionRegistry::default().build(name, &group(p, r)).unwrap())
    }

    #[test]
    fn actions_on_the_line() {
        let left = action_checks(&action(GroupPreset::free_abelian(1), 40, "left-mult"));
        assert_eq!((left.proper, left.cobounded), (Tri::Yes, Tri::Yes));
        assert_eq!(left.k0_radius, Some(0));
        let even = action_checks(&action(GroupPreset::free_abelian(1), 40, "even-subgroup"));
        assert_eq!((even.proper, even.cobounded), (Tri::Yes, Tri::Yes));
        assert_eq!(even.k0_radius, Some(1));
        let trivial = action_checks(&action(GroupPreset::free_abelian(1), 40, "trivial"));
        assert_eq!((trivial.proper, trivial.cobounded), (Tri::Yes, Tri::No));
        let fixed = action_checks(&action(GroupPreset::free_abelian(1), 40, "custom:identity"));
        assert_eq!(fixed.proper, Tri::No);
        for a in [left, even, trivial, fixed] {
            assert!(a.law_holds && a.images_bounded);
        }
    }

    #[test]
    fn actions_on_the_free_group() {
        let cyclic = action_checks(&action(GroupPreset::free_group(2), 8, "cyclic-subgroup"));
        assert_eq!((cyclic.proper, cyclic.cobounded), (Tri::Yes, Tri::No));
        let right = action_checks(&action(GroupPreset::free_group(2), 8, "translation"));
        assert!(right.law_holds);
        assert_eq!((right.proper, right.cobounded), (Tri::Yes, Tri::Yes));
    }

    #[test]
    fn covers_of_the_group_by_itself() {
        let a = action(GroupPreset::free_group(2), 8, "left-mult");
        let b = a.group().cayley().ball_words(1);
        let cmp = induced_cover_comparison(&a, &b).unwrap();
        assert!(cmp.holds && cmp.covers, "{cmp:?}");
        assert!(cmp.stabilizer_radius <= 2);
        assert_eq!(cmp.stabilizer_size, 17);
    }

    #[test]
    fn covers_by_the_even_subgroup() {
        let a = action(GroupPreset::free_abelian(1), 30, "even-subgroup");
        let b = vec![Word::identity(), Word(vec![1])];
        let cmp = induced_cover_comparison(&a, &b).unwrap();
        assert!(cmp.holds && cmp.covers, "{cmp:?}");
        assert_eq!(cmp.stabilizer_size, 1);
        let t = action(GroupPreset::free_abelian(1), 30, "trivial");
        assert!(matches!(induced_cover_comparison(&t, &b), Err(Error::Precondition(_))));
    }

    #[test]
    fn element_and_scale_families_agree() {
        let a = action(GroupPreset::free_abelian(1), 40, "left-mult");
        let c = a.group().cayley();
        let ray = c.set_of(|w| w.exponent_sum(1) >= 0);
        let same = same_eigensets_check(&a, &ray, 2).unwrap();
        assert_eq!((same.per_element, same.per_scale), (Status::Eigenset, Status::Eigenset));
        let same = same_eigensets_check(&a, &c.graph().empty_set(), 2).unwrap();
        assert_eq!((same.per_element, same.per_scale), (Status::Eigenset, Status::Eigenset));

        let a = action(GroupPreset::free_abelian(2), 30, "left-mult");
        let half = a.group().cayley().set_of(|w| w.exponent_sum(1) >= 0);
        let same = same_eigensets_check(&a, &half, 2).unwrap();
        assert_eq!(
            (same.per_element, same.per_scale),
            (Status::NotEigenset, Status::NotEigenset)
        );
    }

    #[test]
    fn end_counts_through_eigensets() {
        for (p, r, level, want) in [
            (GroupPreset::free_abelian(1), 20, 2, 2),
            (GroupPreset::free_abelian(2), 12, 2, 1),
            (GroupPreset::free_group(2), 8, 2, 12),
        ] {
            let a = action(p, r, "translation");
            let space = a.target().clone();
            let dec = decompose(space.graph(), &space.horizon(), &[1, 2]).unwrap();
            let cmp = end_comparison(&a, &dec, level, 2).unwrap();
            assert_eq!(cmp.engine_count, want);
            assert_eq!(cmp.group_side.ends, want, "{cmp:?}");
            assert_eq!(cmp.space_side.ends, want, "{cmp:?}");
            assert!(cmp.agree);
        }
    }

    #[test]
    fn action_files() {
        let spec = ActionSpec::parse("group Z\ntarget Z\naction custom:identity\nsubgroup aa\n", "a.txt").unwrap();
        assert_eq!(spec.action, "custom:identity");
        let g = group(GroupPreset::free_abelian(1), 10);
        let a = spec.build(&g, &ActionRegistry::default()).unwrap();
        assert_eq!(a.generators(), &[Word(vec![1, 1])]);
        assert!(ActionSpec::parse("group Z\ntarget F2\n", "a.txt")
            .unwrap_err()
            .to_string()
            .starts_with("a.txt:2:"));
        assert!(ActionRegistry::default().get("custom:nope").is_err());
    }
}
