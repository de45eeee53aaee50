//! Randomized property suites with deterministic seeding and shrinking
//! reproducers.
//!
//! Instance `i` of suite `s` draws from a ChaCha8 stream keyed by the run
//! seed and the suite name, on stream number `i`, so any single instance can
//! be replayed without running the others.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bitset::{PointSet, VertexSet};
use crate::eigensets::{
    closure_check, cone_families, is_eigenset, matching_component_level, FamilyContext, FamilyRegistry, OperatorFamily,
    Status,
};
use crate::ends::{decompose, default_radii, LevelDecomposition};
use crate::error::{Error, Result};
use crate::graph::{Graph, Horizon, OracleRegistry, PresetKind, Space, VertexId, Word};
use crate::groups::{star_identity_check, ScaledGroup};
use crate::oracles;
use crate::scaled_ba::{
    compactify, complement_equiv_check, enumerate_ends, generate_algebra, is_compact_at_infinity, is_hausdorff,
    mod_equiv, mod_equiv_witness, subalgebra_compactness_check, EndTag, ScaledSpace, SetAlgebra,
};

pub const DEFAULT_INSTANCES: usize = 200;
pub const PER_PRESET_INSTANCES: usize = 100;
const SHRINK_STEPS: usize = 400;

#[derive(Clone, Debug)]
pub struct FuzzConfig {
    pub seed: u64,
    /// Overrides each suite's default instance count.
    pub instances: Option<usize>,
    /// Presets for the suites on groups.
    pub presets: Vec<String>,
    /// Horizon radius for every preset; by default 40 for `Z`, 8 for free
    /// groups and 20 otherwise.
    pub radius: Option<u32>,
    pub shell: u32,
    pub slack: u32,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: None,
            presets: vec!["Z".into(), "Z2".into(), "F2".into()],
            radius: None,
            shell: 1,
            slack: 2,
        }
    }
}

/// A truncated preset with the data the suites share.
pub struct PresetData {
    pub name: String,
    pub space: Arc<Space>,
    pub dec: Arc<LevelDecomposition>,
    pub group: ScaledGroup,
    pub families: BTreeMap<String, OperatorFamily>,
}

pub struct FuzzContext {
    pub config: FuzzConfig,
    presets: Vec<PresetData>,
    wide: Vec<OnceLock<std::result::Result<PresetData, String>>>,
}

fn fuzz_radius(space_name: &str, kind: &PresetKind) -> u32 {
    match kind {
        PresetKind::FreeAbelian(1) => 40,
        PresetKind::FreeGroup(_) => 8,
        _ if space_name == "Z" => 40,
        _ => 20,
    }
}

fn build_preset(name: &str, radius: u32, shell: u32, registry: &OracleRegistry) -> Result<PresetData> {
    let families = FamilyRegistry::default();
    let space = Arc::new(Space::load(name, Horizon::new(radius, shell)?, registry)?);
    let ctx = FamilyContext::new(space.clone());
    let dec = ctx.decomposition()?;
    let mut built = BTreeMap::new();
    for f in ["translations", "stars", "components", "cones"] {
        built.insert(f.to_string(), families.build(f, &ctx)?);
    }
    Ok(PresetData {
        name: name.to_string(),
        group: ScaledGroup::word_balls(space.clone())?,
        space,
        dec,
        families: built,
    })
}

impl FuzzContext {
    pub fn new(config: FuzzConfig) -> Result<Self> {
        let registry = OracleRegistry::default();
        let mut presets = Vec::new();
        for name in &config.presets {
            let preset = registry.get(name)?;
            let r = config.radius.unwrap_or_else(|| fuzz_radius(name, preset.kind()));
            presets.push(build_preset(name, r, config.shell, &registry)?);
        }
        let wide = presets.iter().map(|_| OnceLock::new()).collect();
        Ok(Self { config, presets, wide })
    }

    pub fn presets(&self) -> &[PresetData] {
        &self.presets
    }

    fn preset_for(&self, index: usize) -> Result<&PresetData> {
        if self.presets.is_empty() {
            return Err(Error::Precondition("this suite needs at least one preset".into()));
        }
        Ok(&self.presets[index % self.presets.len()])
    }

    /// Like `preset_for`, rebuilt once at horizon `min_radius` when the
    /// default horizon is smaller. An explicit radius in the config wins.
    fn preset_at_least(&self, index: usize, min_radius: u32) -> Result<&PresetData> {
        let data = self.preset_for(index)?;
        if self.config.radius.is_some() || data.space.horizon().radius() >= min_radius {
            return Ok(data);
        }
        let slot = &self.wide[index % self.presets.len()];
        slot.get_or_init(|| {
            build_preset(&data.name, min_radius, self.config.shell, &OracleRegistry::default())
                .map_err(|e| e.to_string())
        })
        .as_ref()
        .map_err(|e| Error::Internal(e.clone()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    /// The instance did not meet the suite's sampling conditions.
    Skip,
    /// Minimized reproducer.
    Fail(String),
}

/// One randomized property, checked on independent instances.
pub trait FuzzSuite: Send + Sync {
    fn name(&self) -> &str;
    fn summary(&self) -> &str;
    fn default_instances(&self, ctx: &FuzzContext) -> usize {
        let _ = ctx;
        DEFAULT_INSTANCES
    }
    fn instance(&self, ctx: &FuzzContext, index: usize, rng: &mut ChaCha8Rng) -> Result<Outcome>;
}

fn fnv1a(text: &str) -> u64 {
    text.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
    })
}

pub fn instance_rng(seed: u64, suite: &str, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fnv1a(suite));
    rng.set_stream(index as u64);
    rng
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteFailure {
    pub instance: usize,
    pub reproducer: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub instances: usize,
    pub passed: usize,
    pub skipped: usize,
    pub failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<SuiteFailure>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

pub fn run_suite(suite: &dyn FuzzSuite, ctx: &FuzzContext) -> SuiteReport {
    let n = ctx.config.instances.unwrap_or_else(|| suite.default_instances(ctx));
    let seed = ctx.config.seed;
    let outcomes: Vec<Outcome> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(seed, suite.name(), i);
            suite
                .instance(ctx, i, &mut rng)
                .unwrap_or_else(|e| Outcome::Fail(format!("error: {e}")))
        })
        .collect();
    let mut report = SuiteReport {
        suite: suite.name().to_string(),
        instances: n,
        passed: 0,
        skipped: 0,
        failed: 0,
        first_failure: None,
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Outcome::Pass => report.passed += 1,
            Outcome::Skip => report.skipped += 1,
            Outcome::Fail(reproducer) => {
                report.failed += 1;
                report.first_failure.get_or_insert(SuiteFailure {
                    instance: i,
                    reproducer,
                });
            }
        }
    }
    report
}

/// Greedy shrinking: take the first smaller candidate that still fails,
/// until none does.
pub fn shrink<T: Clone>(mut case: T, smaller: impl Fn(&T) -> Vec<T>, fails: impl Fn(&T) -> bool) -> T {
    for _ in 0..SHRINK_STEPS {
        match smaller(&case).into_iter().find(|c| fails(c)) {
            Some(next) => case = next,
            None => break,
        }
    }
    case
}

/// Candidates with one element removed, coarsest first.
fn drop_one<T: Clone>(items: &[T]) -> Vec<Vec<T>> {
    let mut out = Vec::new();
    if items.len() > 1 {
        let half = items.len() / 2;
        out.push(items[..half].to_vec());
        out.push(items[half..].to_vec());
    }
    for i in 0..items.len() {
        let mut v = items.to_vec();
        v.remove(i);
        out.push(v);
    }
    out
}

pub fn random_subset(rng: &mut impl Rng, n: usize, density: f64) -> PointSet {
    PointSet::from_iter(n, (0..n).filter(|_| rng.gen_bool(density)))
}

/// A finite scaled space with algebra generators, printable as a
/// scaled-space file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BaCase {
    pub universe: usize,
    pub scale: Vec<PointSet>,
    pub tails: PointSet,
    pub generators: Vec<PointSet>,
}

impl BaCase {
    /// Up to `max_n` points, three scale generators and `max_gens` algebra
    /// generators; tails are drawn from outside the bounded hull.
    pub fn random(rng: &mut impl Rng, max_n: usize, max_gens: usize) -> Self {
        let n = rng.gen_range(1..=max_n);
        let scale: Vec<PointSet> = (0..rng.gen_range(0..=3)).map(|_| random_subset(rng, n, 0.35)).collect();
        let mut hull = PointSet::empty(n);
        for s in &scale {
            hull.union_with(s);
        }
        let tails = if rng.gen_bool(0.5) {
            PointSet::from_iter(n, hull.complement().iter().filter(|_| rng.gen_bool(0.3)))
        } else {
            PointSet::empty(n)
        };
        let generators = (0..rng.gen_range(0..=max_gens))
            .map(|_| random_subset(rng, n, 0.5))
            .collect();
        Self {
            universe: n,
            scale,
            tails,
            generators,
        }
    }

    pub fn space(&self) -> Result<ScaledSpace> {
        ScaledSpace::new(self.universe, self.scale.clone(), self.tails.clone())
    }

    pub fn algebra(&self) -> Result<SetAlgebra> {
        Ok(generate_algebra(&self.generators, &self.space()?))
    }

    pub fn to_file(&self) -> String {
        let fmt = |s: &PointSet| {
            let pts: Vec<String> = s.iter().map(|p| (p + 1).to_string()).collect();
            format!("{{{}}}", pts.join(","))
        };
        let mut out = format!("universe {}\n", self.universe);
        for s in &self.scale {
            let _ = writeln!(out, "scale {}", fmt(s));
        }
        for g in &self.generators {
            let _ = writeln!(out, "gen {}", fmt(g));
        }
        if !self.tails.is_empty() {
            let _ = writeln!(out, "tail {}", fmt(&self.tails));
        }
        out
    }

    fn without_point(&self, p: usize) -> Self {
        let n = self.universe - 1;
        let f =
            |s: &PointSet| PointSet::from_iter(n, s.iter().filter(|&q| q != p).map(|q| if q > p { q - 1 } else { q }));
        Self {
            universe: n,
            scale: self.scale.iter().map(f).collect(),
            tails: f(&self.tails),
            generators: self.generators.iter().map(f).collect(),
        }
    }

    /// One step smaller: a generator, scale generator or tail point dropped,
    /// or a whole point removed.
    pub fn smaller(&self, points: bool) -> Vec<Self> {
        let mut out = Vec::new();
        for g in drop_one(&self.generators) {
            out.push(Self {
                generators: g,
                ..self.clone()
            });
        }
        for s in drop_one(&self.scale) {
            let mut c = Self {
                scale: s,
                ..self.clone()
            };
            // tails must stay outside the smaller hull
            let mut hull = PointSet::empty(c.universe);
            for x in &c.scale {
                hull.union_with(x);
            }
            c.tails.difference_with(&hull);
            out.push(c);
        }
        for t in self.tails.iter() {
            let mut c = self.clone();
            c.tails.remove(t);
            out.push(c);
        }
        if points && self.universe > 1 {
            out.extend((0..self.universe).map(|p| self.without_point(p)));
        }
        out
    }
}

fn ba_failure(case: BaCase, what: &str, fails: impl Fn(&BaCase) -> bool) -> Outcome {
    let small = shrink(case, |c| c.smaller(true), fails);
    Outcome::Fail(format!("{what}\n{}", small.to_file()))
}

type BaCheck<'a> = (&'a str, &'a dyn Fn(&BaCase) -> Result<bool>);

fn check_ba(rng: &mut ChaCha8Rng, checks: &[BaCheck]) -> Result<Outcome> {
    let case = BaCase::random(rng, 8, 3);
    for (what, check) in checks {
        if !check(&case)? {
            return Ok(ba_failure(case, what, |c| matches!(check(c), Ok(false))));
        }
    }
    Ok(Outcome::Pass)
}

struct ModEquivSuite;
struct CompactnessEndsSuite;
struct EndsOracleSuite;
struct CompactifySuite;
struct GenerateClosureSuite;
struct RefinementSuite;
struct ConeSandwichSuite;
struct FamilyAgreementSuite;
struct StarIdentitySuite;
struct EigensetClosureSuite;

fn pair_checks(case: &BaCase, pairs: &[(PointSet, PointSet)]) -> Result<bool> {
    let space = case.space()?;
    for (c, d) in pairs {
        let fast = mod_equiv(c, d, &space);
        if fast != oracles::brute_mod_equiv(c, d, &space)? {
            return Ok(false);
        }
        if fast != mod_equiv_witness(c, d, &space).is_some() {
            return Ok(false);
        }
        if fast && !complement_equiv_check(c, d, &space) {
            return Ok(false);
        }
    }
    Ok(true)
}

impl FuzzSuite for ModEquivSuite {
    fn name(&self) -> &str {
        "mod-equiv"
    }
    fn summary(&self) -> &str {
        "equivalence mod the scale against the scale-element oracle; complements of equivalent sets are equivalent"
    }
    fn instance(&self, _: &FuzzContext, _: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let case = BaCase::random(rng, 8, 3);
        let n = case.universe;
        let hull = case.space()?.bounded_hull().clone();
        let pairs: Vec<(PointSet, PointSet)> = (0..16)
            .map(|_| {
                let c = random_subset(rng, n, 0.5);
                let d = if rng.gen_bool(0.5) {
                    c.symmetric_difference(&random_subset(rng, n, 0.5).intersection(&hull))
                } else {
                    random_subset(rng, n, 0.5)
                };
                (c, d)
            })
            .collect();
        if pair_checks(&case, &pairs)? {
            return Ok(Outcome::Pass);
        }
        let bad: Vec<_> = pairs
            .into_iter()
            .filter(|p| matches!(pair_checks(&case, std::slice::from_ref(p)), Ok(false)))
            .collect();
        let pair = bad
            .first()
            .cloned()
            .ok_or_else(|| Error::Internal("failure vanished".into()))?;
        let small = shrink(
            case,
            |c| c.smaller(false),
            |c| matches!(pair_checks(c, std::slice::from_ref(&pair)), Ok(false)),
        );
        Ok(Outcome::Fail(format!(
            "pair C={:?} D={:?}\n{}",
            pair.0,
            pair.1,
            small.to_file()
        )))
    }
}

impl FuzzSuite for CompactnessEndsSuite {
    fn name(&self) -> &str {
        "compactness-ends"
    }
    fn summary(&self) -> &str {
        "compact iff the exhaustive cover oracle says so; compact means no external ends; no ends means compact; compact without points at infinity means bounded; closed subalgebras stay compact"
    }
    fn instance(&self, _: &FuzzContext, _: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let pick = rng.gen::<u64>();
        check_ba(
            rng,
            &[
                ("compactness disagrees with the cover oracle", &|c: &BaCase| {
                    let alg = c.algebra()?;
                    Ok(is_compact_at_infinity(&alg).compact == oracles::brute_compact(&alg)?)
                }),
                ("compact algebra with an external end", &|c: &BaCase| {
                    let alg = c.algebra()?;
                    Ok(!is_compact_at_infinity(&alg).compact
                        || enumerate_ends(&alg).iter().all(|e| e.tag == EndTag::Internal))
                }),
                ("algebra without ends is not compact", &|c: &BaCase| {
                    let alg = c.algebra()?;
                    Ok(!enumerate_ends(&alg).is_empty() || is_compact_at_infinity(&alg).compact)
                }),
                ("compact without points at infinity but unbounded", &|c: &BaCase| {
                    let alg = c.algebra()?;
                    let space = alg.space();
                    Ok(!is_compact_at_infinity(&alg).compact
                        || !space.points_at_infinity().is_empty()
                        || space.is_bounded(&space.full()))
                }),
                (
                    "closed subalgebra of a compact algebra is not compact",
                    &|c: &BaCase| {
                        let alg = c.algebra()?;
                        if !is_compact_at_infinity(&alg).compact {
                            return Ok(true);
                        }
                        let elements = oracles::closure_elements(&alg)?;
                        let y = &elements[(pick % elements.len() as u64) as usize];
                        subalgebra_compactness_check(&alg, y)
                    },
                ),
            ],
        )
    }
}

impl FuzzSuite for EndsOracleSuite {
    fn name(&self) -> &str {
        "ends-oracle"
    }
    fn summary(&self) -> &str {
        "end enumeration against the subfamily and intersection oracles; Hausdorff test against its definition"
    }
    fn instance(&self, _: &FuzzContext, _: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        check_ba(
            rng,
            &[
                ("ends differ from the intersection oracle", &|c: &BaCase| {
                    let alg = c.algebra()?;
                    Ok(oracles::ends_as_families(&alg)? == oracles::intersection_ends(&alg)?)
                }),
                ("ends differ from the subfamily oracle", &|c: &BaCase| {
                    let alg = c.algebra()?;
                    match oracles::subfamily_ends(&alg) {
                        Ok(brute) => Ok(oracles::ends_as_families(&alg)? == brute),
                        Err(Error::TooLarge(_)) => Ok(true),
                        Err(e) => Err(e),
                    }
                }),
                ("Hausdorff test disagrees with its definition", &|c: &BaCase| {
                    let alg = c.algebra()?;
                    Ok(is_hausdorff(&alg) == oracles::brute_hausdorff(&alg)?)
                }),
            ],
        )
    }
}

impl FuzzSuite for CompactifySuite {
    fn name(&self) -> &str {
        "compactify"
    }
    fn summary(&self) -> &str {
        "compactification of Hausdorff instances passes every built-in check and adds one point per external end"
    }
    fn instance(&self, _: &FuzzContext, _: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let case = BaCase::random(rng, 8, 3);
        if !is_hausdorff(&case.algebra()?) {
            return Ok(Outcome::Skip);
        }
        let check = |c: &BaCase| -> Result<bool> {
            let alg = c.algebra()?;
            if !is_hausdorff(&alg) {
                return Ok(true);
            }
            let comp = compactify(&alg)?;
            let external = oracles::intersection_ends(&alg)?
                .iter()
                .filter(|e| e.tag == EndTag::External)
                .count();
            let ch = &comp.checks;
            Ok(comp.verified
                && ch.isomorphism
                && ch.closure_meets
                && ch.distinct_ends
                && ch.scale_fixed
                && ch.compact
                && ch.no_external_ends
                && ch.hausdorff
                && comp.validate_condition2()
                && comp.added.len() == external)
        };
        let holds = check(&case).unwrap_or(false);
        Ok(if holds {
            Outcome::Pass
        } else {
            ba_failure(case, "compactification check failed", |c| !check(c).unwrap_or(false))
        })
    }
}

impl FuzzSuite for GenerateClosureSuite {
    fn name(&self) -> &str {
        "generate-closure"
    }
    fn summary(&self) -> &str {
        "generated algebra equals the closure of the generators under complement and union"
    }
    fn instance(&self, _: &FuzzContext, _: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        check_ba(
            rng,
            &[("generated algebra differs from the closure fixpoint", &|c: &BaCase| {
                let alg = c.algebra()?;
                let fix = oracles::closure_fixpoint(&c.generators, alg.space())?;
                let elements: std::collections::BTreeSet<PointSet> =
                    oracles::closure_elements(&alg)?.into_iter().collect();
                Ok(fix == elements && alg.element_count() == elements.len() as u128)
            })],
        )
    }
}

/// Connected subgraph of the `Z^2` lattice ball of radius `r`, with each
/// non-origin vertex deleted independently and the origin's component kept.
pub fn random_lattice_subgraph(rng: &mut impl Rng, r: i64) -> Result<(Graph, Vec<(i64, i64)>)> {
    let p = rng.gen_range(0.0..0.3);
    let mut points = Vec::new();
    for x in -r..=r {
        for y in -r..=r {
            if x.abs() + y.abs() <= r && ((x, y) == (0, 0) || !rng.gen_bool(p)) {
                points.push((x, y));
            }
        }
    }
    let index: BTreeMap<(i64, i64), usize> = points.iter().enumerate().map(|(i, &q)| (q, i)).collect();
    let mut edges = Vec::new();
    for (&(x, y), &i) in &index {
        for q in [(x + 1, y), (x, y + 1)] {
            if let Some(&j) = index.get(&q) {
                edges.push((i as VertexId, j as VertexId));
            }
        }
    }
    let origin = index[&(0, 0)];
    let full = Graph::from_edges(points.len(), &edges, origin as VertexId)?;
    let region = VertexSet::full(points.len());
    let comp = oracles::union_find_components(&full, &region)
        .into_iter()
        .find(|c| c.contains(origin))
        .expect("origin lies in some component");
    let keep: Vec<usize> = comp.iter().collect();
    let renumber: BTreeMap<usize, usize> = keep.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let kept_edges: Vec<(VertexId, VertexId)> = edges
        .iter()
        .filter_map(|&(u, v)| {
            Some((
                *renumber.get(&(u as usize))? as VertexId,
                *renumber.get(&(v as usize))? as VertexId,
            ))
        })
        .collect();
    let graph = Graph::from_edges(keep.len(), &kept_edges, renumber[&origin] as VertexId)?;
    Ok((graph, keep.iter().map(|&v| points[v]).collect()))
}

impl FuzzSuite for RefinementSuite {
    fn name(&self) -> &str {
        "refinement"
    }
    fn summary(&self) -> &str {
        "on random connected lattice subgraphs, each unbounded component lies in exactly one unbounded component of the previous level"
    }
    fn instance(&self, _: &FuzzContext, _: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let (graph, coords) = random_lattice_subgraph(rng, 15)?;
        let horizon = Horizon::with_radius(15)?;
        let radii = default_radii(&horizon, Some(5));
        let violations = oracles::refinement_violations(&graph, &horizon, &radii);
        let engine = decompose(&graph, &horizon, &radii);
        let counts_agree = engine
            .as_ref()
            .map(|d| d.counts() == oracles::brute_counts(&graph, &horizon, &radii))
            .unwrap_or(false);
        if violations.is_empty() && counts_agree {
            return Ok(Outcome::Pass);
        }
        let kept: Vec<String> = coords.iter().map(|(x, y)| format!("({x},{y})")).collect();
        Ok(Outcome::Fail(format!(
            "violations {violations:?}, engine {:?}\nvertices {}",
            engine.map(|d| d.counts()),
            kept.join(" ")
        )))
    }
}

/// A random subset of the truncation: sparse points near the basepoint,
/// unions of balls, a dense scatter, or a component union.
pub fn random_vertex_set(rng: &mut impl Rng, data: &PresetData) -> VertexSet {
    let graph = data.space.graph();
    let h = data.space.horizon();
    let truncated = graph.truncated(&h);
    let members: Vec<usize> = truncated.iter().collect();
    match rng.gen_range(0..4) {
        0 => {
            let near = graph.depth_at_most((h.radius() / 2).max(1));
            VertexSet::from_iter(graph.vertex_count(), near.iter().filter(|_| rng.gen_bool(0.05)))
        }
        1 => {
            let mut out = graph.empty_set();
            for _ in 0..rng.gen_range(1..=4) {
                let c = *members.choose(rng).expect("truncation is nonempty");
                let r = rng.gen_range(0..=3);
                out.union_with(&graph.within_distance(&h, &VertexSet::singleton(graph.vertex_count(), c), r));
            }
            out
        }
        2 => VertexSet::from_iter(
            graph.vertex_count(),
            members.iter().copied().filter(|_| rng.gen_bool(0.5)),
        ),
        _ => component_union(rng, data, 2, u32::MAX),
    }
}

/// Union of a random nonempty selection of the unbounded components of a
/// random level of radius at most `max_radius` (or the first level),
/// changed on a random subset of `ball(noise)`.
pub fn component_union(rng: &mut impl Rng, data: &PresetData, noise: u32, max_radius: u32) -> VertexSet {
    let graph = data.space.graph();
    let eligible = data
        .dec
        .levels()
        .iter()
        .take_while(|l| l.radius <= max_radius)
        .count()
        .max(1);
    let level = data.dec.level(rng.gen_range(0..eligible));
    let comps: Vec<&VertexSet> = level.unbounded().map(|(_, c)| &c.vertices).collect();
    let mut out = graph.empty_set();
    for c in &comps {
        if rng.gen_bool(0.5) {
            out.union_with(c);
        }
    }
    if out.is_empty() {
        if let Some(c) = comps.choose(rng) {
            out.union_with(c);
        }
    }
    let noise = VertexSet::from_iter(
        graph.vertex_count(),
        graph.depth_at_most(noise).iter().filter(|_| rng.gen_bool(0.3)),
    );
    out.symmetric_difference(&noise)
}

impl FuzzSuite for ConeSandwichSuite {
    fn name(&self) -> &str {
        "cone-sandwich"
    }
    fn summary(&self) -> &str {
        "A ⊆ cb(A) ∩ bc(A) ⊆ cb(A) ∪ bc(A) ⊆ g(A) pointwise; cones match the per-target geodesic oracle"
    }
    fn default_instances(&self, ctx: &FuzzContext) -> usize {
        PER_PRESET_INSTANCES * ctx.presets.len().max(1)
    }
    fn instance(&self, ctx: &FuzzContext, index: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let data = ctx.preset_for(index)?;
        let graph = data.space.graph();
        let h = data.space.horizon();
        let a = random_vertex_set(rng, data);
        let radii: Vec<u32> = crate::eigensets::cone_radii_sample(&h);
        let [cb, bc, g] = cone_families(data.space.clone(), &radii, graph.basepoint())?;
        for (i, r) in radii.iter().enumerate() {
            let (x, y, z) = (
                cb.operators()[i].apply(&a),
                bc.operators()[i].apply(&a),
                g.operators()[i].apply(&a),
            );
            let meet = x.intersection(&y);
            let join = x.union(&y);
            if !(a.is_subset(&meet) && join.is_subset(&z)) {
                return Ok(Outcome::Fail(format!("{} radius {r}: A = {:?}", data.name, a)));
            }
        }
        // the oracle runs one search per target, so only on small sets
        let small = VertexSet::from_iter(graph.vertex_count(), a.iter().take(12));
        let fast = crate::eigensets::cone(graph, &h, &small, graph.basepoint());
        if fast != oracles::brute_cone(graph, &h, &small, graph.basepoint()) {
            return Ok(Outcome::Fail(format!(
                "{} cone differs from the oracle: A = {small:?}",
                data.name
            )));
        }
        Ok(Outcome::Pass)
    }
}

fn agree(statuses: &[Status]) -> bool {
    let decided: Vec<Status> = statuses
        .iter()
        .copied()
        .filter(|&s| s != Status::Undetermined)
        .collect();
    decided.windows(2).all(|w| w[0] == w[1])
}

impl FuzzSuite for FamilyAgreementSuite {
    fn name(&self) -> &str {
        "family-agreement"
    }
    fn summary(&self) -> &str {
        "cb, bc and g agree across basepoints near the identity; component unions are g-eigensets and g-eigensets match component unions"
    }
    fn default_instances(&self, ctx: &FuzzContext) -> usize {
        PER_PRESET_INSTANCES * ctx.presets.len().max(1)
    }
    fn instance(&self, ctx: &FuzzContext, index: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let data = ctx.preset_for(index)?;
        let graph = data.space.graph();
        let h = data.space.horizon();
        let slack = ctx.config.slack;
        // Residues a few steps out already reach the outer shell of the safe
        // zone on small horizons, so the samples stay close to the basepoint.
        let near_radius = (h.radius() / 8).clamp(1, 2);
        let sample = rng.gen_range(0..3);
        let from_components = sample == 0;
        let a = match sample {
            0 => component_union(rng, data, near_radius, near_radius),
            1 => VertexSet::from_iter(
                graph.vertex_count(),
                graph.depth_at_most(near_radius).iter().filter(|_| rng.gen_bool(0.3)),
            ),
            _ => VertexSet::from_iter(
                graph.vertex_count(),
                graph.truncated(&h).iter().filter(|_| rng.gen_bool(0.5)),
            ),
        };
        let radii: Vec<u32> = crate::eigensets::cone_radii_sample(&h)
            .into_iter()
            .filter(|&r| r <= near_radius)
            .collect();
        let near: Vec<VertexId> = graph.depth_at_most(near_radius).iter().map(|v| v as VertexId).collect();
        let mut basepoints = vec![graph.basepoint()];
        basepoints.extend(near.choose_multiple(rng, 2).copied());
        let mut statuses = Vec::new();
        let mut g_at_base = None;
        for &p in &basepoints {
            for fam in cone_families(data.space.clone(), &radii, p)? {
                let verdict = is_eigenset(&a, &fam, slack);
                statuses.push(verdict.status);
                if p == graph.basepoint() && fam.name() == "cones-g" {
                    g_at_base = Some((verdict, fam));
                }
            }
        }
        if !agree(&statuses) {
            return Ok(Outcome::Fail(format!(
                "{}: verdicts {statuses:?} on A = {a:?}",
                data.name
            )));
        }
        let (g_verdict, g_family) = g_at_base.expect("the basepoint is sampled");
        let g_status = g_verdict.status;
        if from_components && g_status != Status::Eigenset {
            return Ok(Outcome::Fail(format!(
                "{}: component union judged {g_status:?}: {a:?}",
                data.name
            )));
        }
        if g_status == Status::Eigenset {
            let margin = g_family
                .operators()
                .iter()
                .map(|o| o.safety_margin())
                .max()
                .unwrap_or(0);
            // compare beyond the residues, where A should be exactly a union
            let inner = graph.depth_at_most(g_verdict.bounding_radius.unwrap_or(0));
            let zone = graph
                .depth_at_most(h.radius().saturating_sub(margin))
                .difference(&inner);
            if matching_component_level(&a, &data.dec, &zone).is_none() {
                return Ok(Outcome::Fail(format!(
                    "{}: g-eigenset matches no component union: {a:?}",
                    data.name
                )));
            }
        }
        Ok(Outcome::Pass)
    }
}

impl FuzzSuite for StarIdentitySuite {
    fn name(&self) -> &str {
        "star-identity"
    }
    fn summary(&self) -> &str {
        "the star of A against the translates of B, outside A, equals B·B⁻¹·A outside A, exactly inside the safe zone"
    }
    fn default_instances(&self, ctx: &FuzzContext) -> usize {
        PER_PRESET_INSTANCES * ctx.presets.len().max(1)
    }
    fn instance(&self, ctx: &FuzzContext, index: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let data = ctx.preset_for(index)?;
        let c = data.group.cayley();
        let reach = (c.horizon().radius() / 4).clamp(1, 3);
        let ball = c.ball_words(rng.gen_range(1..=reach));
        let mut b: Vec<Word> = ball.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
        if b.is_empty() {
            b.push(ball.choose(rng).expect("balls are nonempty").clone());
        }
        let a = random_vertex_set(rng, data);
        let fails = |a: &[usize], b: &[Word]| -> bool {
            let set = VertexSet::from_iter(c.vertex_count(), a.iter().copied());
            !star_identity_check(&data.group, &set, b)
                .map(|s| s.holds)
                .unwrap_or(false)
        };
        let members: Vec<usize> = a.iter().collect();
        if !fails(&members, &b) {
            return Ok(Outcome::Pass);
        }
        let (a_small, b_small) = shrink(
            (members, b),
            |(a, b)| {
                let mut out: Vec<(Vec<usize>, Vec<Word>)> = drop_one(b)
                    .into_iter()
                    .filter(|x| !x.is_empty())
                    .map(|x| (a.clone(), x))
                    .collect();
                if a.len() <= 64 {
                    out.extend(drop_one(a).into_iter().map(|x| (x, b.clone())));
                }
                out
            },
            |(a, b)| fails(a, b),
        );
        let words: Vec<String> = a_small.iter().map(|&v| c.element(v as VertexId).to_string()).collect();
        let bw: Vec<String> = b_small.iter().map(Word::to_string).collect();
        Ok(Outcome::Fail(format!(
            "{}: A = {{{}}}, B = {{{}}}",
            data.name,
            words.join(","),
            bw.join(",")
        )))
    }
}

const CLOSURE_FAMILIES: [&str; 4] = ["translations", "stars", "components", "cones"];

/// Below this horizon no component union of a free group is certified
/// under the widest cone operator, so the suite would only draw skips.
const CLOSURE_FREE_GROUP_RADIUS: u32 = 10;

fn closure_radius(name: &str) -> u32 {
    match OracleRegistry::default().get(name).map(|p| p.kind().clone()) {
        Ok(PresetKind::FreeGroup(_)) => CLOSURE_FREE_GROUP_RADIUS,
        _ => 0,
    }
}

impl FuzzSuite for EigensetClosureSuite {
    fn name(&self) -> &str {
        "eigenset-closure"
    }
    fn summary(&self) -> &str {
        "union, intersection and difference of two eigensets are never judged not to be eigensets"
    }
    fn default_instances(&self, _: &FuzzContext) -> usize {
        PER_PRESET_INSTANCES * CLOSURE_FAMILIES.len()
    }
    fn instance(&self, ctx: &FuzzContext, index: usize, rng: &mut ChaCha8Rng) -> Result<Outcome> {
        let family_name = CLOSURE_FAMILIES[index % CLOSURE_FAMILIES.len()];
        let slot = index / CLOSURE_FAMILIES.len();
        let data = ctx.preset_at_least(slot, closure_radius(&ctx.preset_for(slot)?.name))?;
        let family = &data.families[family_name];
        let slack = ctx.config.slack;
        let mut draw = || {
            (0..64)
                .map(|_| {
                    let noise = rng.gen_range(0..=2);
                    component_union(rng, data, noise, u32::MAX)
                })
                .find(|a| is_eigenset(a, family, slack).status == Status::Eigenset)
        };
        let (Some(a), Some(b)) = (draw(), draw()) else {
            return Ok(Outcome::Skip);
        };
        let report = closure_check(&a, &b, family, slack);
        Ok(if report.holds {
            Outcome::Pass
        } else {
            Outcome::Fail(format!("{} {family_name}: {report:?}\nA = {a:?}\nB = {b:?}", data.name))
        })
    }
}

/// Suites by name, run in name order.
pub struct SuiteRegistry {
    suites: BTreeMap<String, Arc<dyn FuzzSuite>>,
}

impl Default for SuiteRegistry {
    fn default() -> Self {
        let mut reg = Self {
            suites: BTreeMap::new(),
        };
        let all: [Arc<dyn FuzzSuite>; 10] = [
            Arc::new(ModEquivSuite),
            Arc::new(CompactnessEndsSuite),
            Arc::new(EndsOracleSuite),
            Arc::new(CompactifySuite),
            Arc::new(GenerateClosureSuite),
            Arc::new(RefinementSuite),
            Arc::new(ConeSandwichSuite),
            Arc::new(FamilyAgreementSuite),
            Arc::new(StarIdentitySuite),
            Arc::new(EigensetClosureSuite),
        ];
        for s in all {
            reg.register(s);
        }
        reg
    }
}

impl SuiteRegistry {
    pub fn register(&mut self, suite: Arc<dyn FuzzSuite>) {
        self.suites.insert(suite.name().to_string(), suite);
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn FuzzSuite>> {
        self.suites.get(name).ok_or_else(|| Error::Unknown {
            kind: "fuzz suite",
            name: name.to_string(),
        })
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.suites.keys().map(String::as_str)
    }

    pub fn suites(&self) -> impl Iterator<Item = &Arc<dyn FuzzSuite>> {
        self.suites.values()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(presets: &[&str], n: usize) -> FuzzContext {
        FuzzContext::new(FuzzConfig {
            instances: Some(n),
            presets: presets.iter().map(|s| s.to_string()).collect(),
            ..FuzzConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn streams_are_reproducible() {
        let a: u64 = instance_rng(7, "mod-equiv", 3).gen();
        let b: u64 = instance_rng(7, "mod-equiv", 3).gen();
        let c: u64 = instance_rng(7, "mod-equiv", 4).gen();
        let d: u64 = instance_rng(7, "ends-oracle", 3).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn shrinking_finds_a_minimal_case() {
        // fails whenever some generator has at least two points
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let case = loop {
            let c = BaCase::random(&mut rng, 8, 3);
            if c.generators.iter().any(|g| g.len() >= 2) {
                break c;
            }
        };
        let fails = |c: &BaCase| c.generators.iter().any(|g| g.len() >= 2);
        let small = shrink(case, |c| c.smaller(true), fails);
        assert_eq!(small.universe, 2);
        assert_eq!(small.generators.len(), 1);
        assert!(small.scale.is_empty());
        assert!(parse_back(&small.to_file()));
    }

    fn parse_back(text: &str) -> bool {
        crate::scaled_ba::parse_scaled_space(text, "case").is_ok()
    }

    #[test]
    fn finite_suites_pass_a_short_run() {
        let ctx = ctx(&[], 40);
        let reg = SuiteRegistry::default();
        for name in [
            "mod-equiv",
            "compactness-ends",
            "ends-oracle",
            "compactify",
            "generate-closure",
        ] {
            let r = run_suite(reg.get(name).unwrap().as_ref(), &ctx);
            assert!(r.ok(), "{r:?}");
            assert_eq!(r.instances, 40);
        }
    }

    #[test]
    fn group_suites_pass_a_short_run() {
        let ctx = ctx(&["Z", "F2"], 6);
        let reg = SuiteRegistry::default();
        for name in [
            "refinement",
            "cone-sandwich",
            "family-agreement",
            "star-identity",
            "eigenset-closure",
        ] {
            let r = run_suite(reg.get(name).unwrap().as_ref(), &ctx);
            assert!(r.ok(), "{r:?}");
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let ctx = ctx(&["Z"], 10);
        let suite = SuiteRegistry::default();
        let s = suite.get("star-identity").unwrap();
        assert_eq!(run_suite(s.as_ref(), &ctx), run_suite(s.as_ref(), &ctx));
    }
}
