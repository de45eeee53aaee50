use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use super::{Operator, OperatorFamily};
use crate::bitset::VertexSet;
use crate::ends::{decompose, default_radii, LevelDecomposition};
use crate::error::{Error, Result};
use crate::graph::{Graph, Horizon, Space, VertexId, Word, UNREACHABLE};

pub struct TranslationOperator {
    space: Arc<Space>,
    generator: Word,
}

impl Operator for TranslationOperator {
    fn name(&self) -> String {
        format!("right-translate {}", self.generator)
    }

    fn apply(&self, a: &VertexSet) -> VertexSet {
        let c = self.space.cayley().expect("translations are built on groups");
        c.right_product(a, std::slice::from_ref(&self.generator))
    }

    fn safety_margin(&self) -> u32 {
        1
    }
}

/// `A ↦ A · g` for every generator and inverse.
pub fn translation_family(space: Arc<Space>) -> Result<OperatorFamily> {
    let c = space.require_group()?;
    let operators = c
        .preset()
        .generators()
        .into_iter()
        .map(|g| {
            Arc::new(TranslationOperator {
                space: space.clone(),
                generator: Word(vec![g]),
            }) as Arc<dyn Operator>
        })
        .collect();
    OperatorFamily::new("translations", space.clone(), operators)
}

/// A cover of the truncated graph by sets of bounded diameter.
#[derive(Clone, Debug)]
pub struct Cover {
    name: String,
    diameter: u32,
    elements: Vec<Vec<VertexId>>,
    membership: Vec<Vec<u32>>,
}

fn local_distances(graph: &Graph, horizon: &Horizon, source: VertexId, limit: u32) -> HashMap<VertexId, u32> {
    let mut dist = HashMap::from([(source, 0)]);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let d = dist[&v];
        if d == limit {
            continue;
        }
        for &u in graph.neighbors(v) {
            if graph.depth(u) <= horizon.radius() && !dist.contains_key(&u) {
                dist.insert(u, d + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

impl Cover {
    /// Checks every element against the declared diameter and that the
    /// elements cover the truncation.
    pub fn new(
        name: impl Into<String>,
        graph: &Graph,
        horizon: &Horizon,
        elements: Vec<Vec<VertexId>>,
        diameter: u32,
    ) -> Result<Self> {
        for (i, e) in elements.iter().enumerate() {
            if let Some(&v) = e.iter().find(|&&v| v as usize >= graph.vertex_count()) {
                return Err(Error::InvalidCover(format!("element {i} names unknown vertex {v}")));
            }
            for &v in e {
                let dist = local_distances(graph, horizon, v, diameter);
                if let Some(&u) = e.iter().find(|u| !dist.contains_key(u)) {
                    return Err(Error::InvalidCover(format!(
                        "element {i}: vertices {v} and {u} are farther apart than the declared diameter {diameter}"
                    )));
                }
            }
        }
        let cover = Self::trusted(name, graph, elements, diameter);
        let truncated = graph.truncated(horizon);
        if let Some(v) = truncated.iter().find(|&v| cover.membership[v].is_empty()) {
            return Err(Error::InvalidCover(format!("vertex {v} is not covered")));
        }
        Ok(cover)
    }

    fn trusted(name: impl Into<String>, graph: &Graph, elements: Vec<Vec<VertexId>>, diameter: u32) -> Self {
        let mut membership = vec![Vec::new(); graph.vertex_count()];
        for (i, e) in elements.iter().enumerate() {
            for &v in e {
                membership[v as usize].push(i as u32);
            }
        }
        Self {
            name: name.into(),
            diameter,
            elements,
            membership,
        }
    }

    pub fn singletons(graph: &Graph, horizon: &Horizon) -> Self {
        let elements = graph.truncated(horizon).iter().map(|v| vec![v as VertexId]).collect();
        Self::trusted("singletons", graph, elements, 0)
    }

    /// Edges of the truncation, plus singletons for isolated vertices.
    pub fn edges(graph: &Graph, horizon: &Horizon) -> Self {
        let truncated = graph.truncated(horizon);
        let mut elements: Vec<Vec<VertexId>> = graph
            .edges()
            .filter(|&(u, v)| truncated.contains(u as usize) && truncated.contains(v as usize))
            .map(|(u, v)| vec![u, v])
            .collect();
        for v in truncated.iter() {
            if graph
                .neighbors(v as VertexId)
                .iter()
                .all(|&u| !truncated.contains(u as usize))
            {
                elements.push(vec![v as VertexId]);
            }
        }
        Self::trusted("edges", graph, elements, 1)
    }

    /// Closed unit balls around every vertex of the truncation.
    pub fn unit_balls(graph: &Graph, horizon: &Horizon) -> Self {
        let truncated = graph.truncated(horizon);
        let elements = truncated
            .iter()
            .map(|v| {
                std::iter::once(v as VertexId)
                    .chain(
                        graph
                            .neighbors(v as VertexId)
                            .iter()
                            .copied()
                            .filter(|&u| truncated.contains(u as usize)),
                    )
                    .collect()
            })
            .collect();
        Self::trusted("unit-balls", graph, elements, 2)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn diameter(&self) -> u32 {
        self.diameter
    }

    pub fn elements(&self) -> &[Vec<VertexId>] {
        &self.elements
    }

    /// `st(A, U)`: union of the elements meeting `A`.
    pub fn star(&self, a: &VertexSet) -> VertexSet {
        let mut hit = vec![false; self.elements.len()];
        let mut out = VertexSet::empty(a.universe());
        for v in a.iter() {
            for &e in &self.membership[v] {
                if !hit[e as usize] {
                    hit[e as usize] = true;
                    for &u in &self.elements[e as usize] {
                        out.insert(u as usize);
                    }
                }
            }
        }
        out
    }
}

pub fn default_covers(space: &Space) -> Vec<Arc<Cover>> {
    let (g, h) = (space.graph(), space.horizon());
    vec![Arc::new(Cover::edges(g, &h)), Arc::new(Cover::unit_balls(g, &h))]
}

pub struct StarOperator {
    cover: Arc<Cover>,
}

impl Operator for StarOperator {
    fn name(&self) -> String {
        format!("star {}", self.cover.name())
    }

    fn apply(&self, a: &VertexSet) -> VertexSet {
        self.cover.star(a)
    }

    fn safety_margin(&self) -> u32 {
        self.cover.diameter()
    }
}

pub fn star_family(space: Arc<Space>, covers: &[Arc<Cover>]) -> Result<OperatorFamily> {
    let operators = covers
        .iter()
        .map(|c| Arc::new(StarOperator { cover: c.clone() }) as Arc<dyn Operator>)
        .collect();
    OperatorFamily::new("stars", space, operators)
}

/// Identity on unions of unbounded components of some level; otherwise the
/// star of `A` against the unbounded components of its own level that `A`
/// meets in the shell.
pub struct ComponentOperator {
    space: Arc<Space>,
    dec: Arc<LevelDecomposition>,
    level: usize,
    kernel: VertexSet,
}

impl ComponentOperator {
    fn is_component_union(&self, a: &VertexSet) -> bool {
        self.dec.levels().iter().any(|lv| {
            lv.unbounded().all(|(_, c)| {
                let hit = c.vertices.intersection(a);
                hit.is_empty() || hit == c.vertices
            })
        })
    }
}

impl Operator for ComponentOperator {
    fn name(&self) -> String {
        format!("components r={}", self.dec.level(self.level).radius)
    }

    fn apply(&self, a: &VertexSet) -> VertexSet {
        if self.is_component_union(a) {
            return a.clone();
        }
        let graph = self.space.graph();
        let shell = self.space.horizon().shell_start();
        let mut out = a.intersection(&self.kernel);
        for (_, c) in self.dec.level(self.level).unbounded() {
            let hit = c.vertices.intersection(a);
            if hit.iter().any(|v| graph.depth(v as VertexId) >= shell) {
                out.union_with(&c.vertices);
            }
        }
        out
    }

    fn safety_margin(&self) -> u32 {
        self.space.horizon().shell_width()
    }
}

pub fn component_family(space: Arc<Space>, dec: Arc<LevelDecomposition>) -> Result<OperatorFamily> {
    let n = space.graph().vertex_count();
    let operators = (0..dec.depth())
        .map(|level| {
            let lv = dec.level(level);
            let kernel = lv.removed.union(&lv.bounded_union(n));
            Arc::new(ComponentOperator {
                space: space.clone(),
                dec: dec.clone(),
                level,
                kernel,
            }) as Arc<dyn Operator>
        })
        .collect();
    OperatorFamily::new("components", space, operators)
}

/// Breadth-first distances from `basepoint` in the truncation, with the
/// vertices bucketed by distance.
struct Geodesics {
    dist: Vec<u32>,
    layers: Vec<Vec<VertexId>>,
}

impl Geodesics {
    fn new(graph: &Graph, horizon: &Horizon, basepoint: VertexId) -> Self {
        let src = VertexSet::singleton(graph.vertex_count(), basepoint as usize);
        let dist = graph.distances_from(horizon, &src, UNREACHABLE);
        let mut layers: Vec<Vec<VertexId>> = Vec::new();
        for (v, &d) in dist.iter().enumerate() {
            if d != UNREACHABLE {
                if layers.len() <= d as usize {
                    layers.resize(d as usize + 1, Vec::new());
                }
                layers[d as usize].push(v as VertexId);
            }
        }
        Self { dist, layers }
    }

    /// Vertices on some shortest path from the basepoint to a member of `a`,
    /// by walking the shortest-path DAG backwards.
    fn cone(&self, graph: &Graph, a: &VertexSet) -> VertexSet {
        let mut marked = VertexSet::from_iter(a.universe(), a.iter().filter(|&v| self.dist[v] != UNREACHABLE));
        for d in (1..self.layers.len()).rev() {
            for &v in &self.layers[d] {
                if marked.contains(v as usize) {
                    for &u in graph.neighbors(v) {
                        if self.dist[u as usize] + 1 == d as u32 {
                            marked.insert(u as usize);
                        }
                    }
                }
            }
        }
        marked
    }
}

/// `Cone(A, basepoint)` in the truncated graph.
pub fn cone(graph: &Graph, horizon: &Horizon, a: &VertexSet, basepoint: VertexId) -> VertexSet {
    Geodesics::new(graph, horizon, basepoint).cone(graph, a)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeKind {
    /// `Cone(B(A, r))`
    ConeOfBall,
    /// `B(Cone(A), r)`
    BallOfCone,
    /// `B(Cone(B(A, r)), r)`
    Both,
}

impl ConeKind {
    pub fn tag(self) -> &'static str {
        match self {
            ConeKind::ConeOfBall => "cb",
            ConeKind::BallOfCone => "bc",
            ConeKind::Both => "g",
        }
    }
}

pub struct ConeOperator {
    space: Arc<Space>,
    kind: ConeKind,
    radius: u32,
    basepoint: VertexId,
    offset: u32,
    geodesics: Arc<Geodesics>,
}

impl Operator for ConeOperator {
    fn name(&self) -> String {
        format!("{}_{} at {}", self.kind.tag(), self.radius, self.basepoint)
    }

    fn apply(&self, a: &VertexSet) -> VertexSet {
        let graph = self.space.graph();
        let h = self.space.horizon();
        let ball = |s: &VertexSet| graph.within_distance(&h, s, self.radius);
        match self.kind {
            ConeKind::ConeOfBall => self.geodesics.cone(graph, &ball(a)),
            ConeKind::BallOfCone => ball(&self.geodesics.cone(graph, a)),
            ConeKind::Both => ball(&self.geodesics.cone(graph, &ball(a))),
        }
    }

    fn safety_margin(&self) -> u32 {
        let own = match self.kind {
            ConeKind::Both => 2 * self.radius,
            _ => self.radius,
        };
        own + 2 * self.offset
    }
}

/// `{1, 2, 4}` cut to radii at most `R / 4`.
pub fn cone_radii_sample(horizon: &Horizon) -> Vec<u32> {
    [1, 2, 4].into_iter().filter(|&r| r <= horizon.radius() / 4).collect()
}

/// The `cb`, `bc` and `g` families for the given radii and basepoint.
pub fn cone_families(space: Arc<Space>, radii: &[u32], basepoint: VertexId) -> Result<[OperatorFamily; 3]> {
    let h = space.horizon();
    let graph = space.graph();
    if radii.is_empty() {
        return Err(Error::HorizonTooSmall(format!(
            "no cone radius fits in R/4 = {}",
            h.radius() / 4
        )));
    }
    if let Some(&r) = radii.iter().find(|&&r| r == 0 || r > h.radius() / 4) {
        return Err(Error::HorizonTooSmall(format!(
            "cone radius {r} must lie in 1..={}",
            h.radius() / 4
        )));
    }
    if basepoint as usize >= graph.vertex_count() || graph.depth(basepoint) > h.radius() {
        return Err(Error::OutsideHorizon(basepoint));
    }
    let geodesics = Arc::new(Geodesics::new(graph, &h, basepoint));
    let offset = graph.depth(basepoint);
    let family = |kind: ConeKind| {
        let ops = radii
            .iter()
            .map(|&radius| {
                Arc::new(ConeOperator {
                    space: space.clone(),
                    kind,
                    radius,
                    basepoint,
                    offset,
                    geodesics: geodesics.clone(),
                }) as Arc<dyn Operator>
            })
            .collect();
        OperatorFamily::new(format!("cones-{}", kind.tag()), space.clone(), ops)
    };
    Ok([
        family(ConeKind::ConeOfBall)?,
        family(ConeKind::BallOfCone)?,
        family(ConeKind::Both)?,
    ])
}

/// `A ↦ {x : ⟨x, y⟩_p > r for some y ∈ A}`; exploratory.
pub struct GromovOperator {
    space: Arc<Space>,
    basepoint: VertexId,
    radius: u32,
    base_dist: Vec<u32>,
}

impl Operator for GromovOperator {
    fn name(&self) -> String {
        format!("gromov r={} at {}", self.radius, self.basepoint)
    }

    fn apply(&self, a: &VertexSet) -> VertexSet {
        let graph = self.space.graph();
        let h = self.space.horizon();
        let n = graph.vertex_count();
        let members: Vec<usize> = a.iter().filter(|&y| self.base_dist[y] != UNREACHABLE).collect();
        members
            .par_iter()
            .map(|&y| {
                let dy = graph.distances_from(&h, &VertexSet::singleton(n, y), UNREACHABLE);
                VertexSet::from_iter(
                    n,
                    (0..n).filter(|&x| {
                        self.base_dist[x] != UNREACHABLE
                            && dy[x] != UNREACHABLE
                            && self.base_dist[x] + self.base_dist[y] > dy[x] + 2 * self.radius
                    }),
                )
            })
            .reduce(|| VertexSet::empty(n), |p, q| p.union(&q))
    }

    fn safety_margin(&self) -> u32 {
        0
    }
}

pub fn gromov_operator(space: Arc<Space>, basepoint: VertexId, radius: u32) -> Result<GromovOperator> {
    let graph = space.graph();
    let h = space.horizon();
    if basepoint as usize >= graph.vertex_count() || graph.depth(basepoint) > h.radius() {
        return Err(Error::OutsideHorizon(basepoint));
    }
    let src = VertexSet::singleton(graph.vertex_count(), basepoint as usize);
    let base_dist = graph.distances_from(&h, &src, UNREACHABLE);
    Ok(GromovOperator {
        space: space.clone(),
        basepoint,
        radius,
        base_dist,
    })
}

/// Inputs shared by the family builders; unset fields fall back to defaults.
pub struct FamilyContext {
    pub space: Arc<Space>,
    pub radii: Option<Vec<u32>>,
    pub cone_radii: Option<Vec<u32>>,
    pub basepoint: Option<VertexId>,
    pub covers: Option<Vec<Arc<Cover>>>,
    pub gromov_radius: u32,
    decomposition: OnceLock<Arc<LevelDecomposition>>,
}

impl FamilyContext {
    pub fn new(space: Arc<Space>) -> Self {
        Self {
            space,
            radii: None,
            cone_radii: None,
            basepoint: None,
            covers: None,
            gromov_radius: 1,
            decomposition: OnceLock::new(),
        }
    }

    pub fn with_radii(mut self, radii: Vec<u32>) -> Self {
        self.radii = Some(radii);
        self.decomposition = OnceLock::new();
        self
    }

    pub fn with_basepoint(mut self, basepoint: VertexId) -> Self {
        self.basepoint = Some(basepoint);
        self
    }

    pub fn with_cone_radii(mut self, radii: Vec<u32>) -> Self {
        self.cone_radii = Some(radii);
        self
    }

    pub fn basepoint(&self) -> VertexId {
        self.basepoint.unwrap_or_else(|| self.space.graph().basepoint())
    }

    pub fn decomposition_radii(&self) -> Vec<u32> {
        self.radii
            .clone()
            .unwrap_or_else(|| default_radii(&self.space.horizon(), self.space.default_levels()))
    }

    pub fn decomposition(&self) -> Result<Arc<LevelDecomposition>> {
        if let Some(d) = self.decomposition.get() {
            return Ok(d.clone());
        }
        let dec = Arc::new(decompose(
            self.space.graph(),
            &self.space.horizon(),
            &self.decomposition_radii(),
        )?);
        Ok(self.decomposition.get_or_init(|| dec).clone())
    }

    pub fn cone_radii(&self) -> Vec<u32> {
        self.cone_radii
            .clone()
            .unwrap_or_else(|| cone_radii_sample(&self.space.horizon()))
    }
}

/// Builds one named operator family from a context.
pub trait FamilyBuilder: Send + Sync {
    fn name(&self) -> &str;
    fn summary(&self) -> &str;
    fn build(&self, ctx: &FamilyContext) -> Result<OperatorFamily>;
}

struct Translations;
struct Stars;
struct Components;
struct Cones(Option<ConeKind>);
struct Gromov;

impl FamilyBuilder for Translations {
    fn name(&self) -> &str {
        "translations"
    }
    fn summary(&self) -> &str {
        "right translation by each generator and inverse"
    }
    fn build(&self, ctx: &FamilyContext) -> Result<OperatorFamily> {
        translation_family(ctx.space.clone())
    }
}

impl FamilyBuilder for Stars {
    fn name(&self) -> &str {
        "stars"
    }
    fn summary(&self) -> &str {
        "stars against the given covers (default: edges and unit balls)"
    }
    fn build(&self, ctx: &FamilyContext) -> Result<OperatorFamily> {
        let covers = ctx.covers.clone().unwrap_or_else(|| default_covers(&ctx.space));
        star_family(ctx.space.clone(), &covers)
    }
}

impl FamilyBuilder for Components {
    fn name(&self) -> &str {
        "components"
    }
    fn summary(&self) -> &str {
        "one component operator per decomposition radius"
    }
    fn build(&self, ctx: &FamilyContext) -> Result<OperatorFamily> {
        component_family(ctx.space.clone(), ctx.decomposition()?)
    }
}

impl FamilyBuilder for Cones {
    fn name(&self) -> &str {
        match self.0 {
            None => "cones",
            Some(ConeKind::ConeOfBall) => "cones-cb",
            Some(ConeKind::BallOfCone) => "cones-bc",
            Some(ConeKind::Both) => "cones-g",
        }
    }
    fn summary(&self) -> &str {
        match self.0 {
            None => "cb, bc and g cone operators together",
            Some(ConeKind::ConeOfBall) => "cone of the r-ball",
            Some(ConeKind::BallOfCone) => "r-ball of the cone",
            Some(ConeKind::Both) => "r-ball of the cone of the r-ball",
        }
    }
    fn build(&self, ctx: &FamilyContext) -> Result<OperatorFamily> {
        let [cb, bc, g] = cone_families(ctx.space.clone(), &ctx.cone_radii(), ctx.basepoint())?;
        Ok(match self.0 {
            None => OperatorFamily::merged("cones", &[cb, bc, g])?,
            Some(ConeKind::ConeOfBall) => cb,
            Some(ConeKind::BallOfCone) => bc,
            Some(ConeKind::Both) => g,
        })
    }
}

impl FamilyBuilder for Gromov {
    fn name(&self) -> &str {
        "gromov"
    }
    fn summary(&self) -> &str {
        "Gromov-product neighbourhoods (exploratory)"
    }
    fn build(&self, ctx: &FamilyContext) -> Result<OperatorFamily> {
        let op = gromov_operator(ctx.space.clone(), ctx.basepoint(), ctx.gromov_radius)?;
        OperatorFamily::new("gromov", ctx.space.clone(), vec![Arc::new(op)])
    }
}

pub struct FamilyRegistry {
    builders: BTreeMap<String, Arc<dyn FamilyBuilder>>,
}

impl Default for FamilyRegistry {
    fn default() -> Self {
        let mut reg = Self {
            builders: BTreeMap::new(),
        };
        reg.register(Arc::new(Translations));
        reg.register(Arc::new(Stars));
        reg.register(Arc::new(Components));
        reg.register(Arc::new(Cones(None)));
        reg.register(Arc::new(Cones(Some(ConeKind::ConeOfBall))));
        reg.register(Arc::new(Cones(Some(ConeKind::BallOfCone))));
        reg.register(Arc::new(Cones(Some(ConeKind::Both))));
        reg.register(Arc::new(Gromov));
        reg
    }
}

impl FamilyRegistry {
    pub fn register(&mut self, builder: Arc<dyn FamilyBuilder>) {
        self.builders.insert(builder.name().to_string(), builder);
    }

    pub fn get(&self, name: &str) -> Result<&Arc<dyn FamilyBuilder>> {
        self.builders.get(name).ok_or_else(|| Error::Unknown {
            kind: "operator family",
            name: name.to_string(),
        })
    }

    pub fn build(&self, name: &str, ctx: &FamilyContext) -> Result<OperatorFamily> {
        self.get(name)?.build(ctx)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.builders.keys().map(String::as_str)
    }
}
