use std::collections::{HashMap, VecDeque};
use std::sync::OnceLock;

use super::group::{validate_oracle, GroupPreset, Letter, Word};
use super::{Graph, Horizon, VertexId};
use crate::bitset::VertexSet;
use crate::error::{Error, Result};

/// Overrides the per-preset radius caps with a vertex budget.
pub const MAX_VERTICES_ENV: &str = "ENDSLAB_MAX_VERTICES";

pub fn max_vertices_override() -> Option<u128> {
    std::env::var(MAX_VERTICES_ENV).ok()?.trim().parse().ok()
}

/// Cayley graph of a preset truncated to a word-length ball around the
/// identity. Vertex ids follow breadth-first order, so vertex 0 is the
/// identity and ids are sorted by word length.
#[derive(Clone, Debug)]
pub struct CayleyGraph {
    preset: GroupPreset,
    graph: Graph,
    horizon: Horizon,
    elements: Vec<Word>,
    index: HashMap<Word, VertexId>,
    tables: OnceLock<MulTables>,
}

/// `right[i][v]` is `v · s_i` and `left[i][v]` is `s_i · v` for the i-th
/// signed generator, when the product lies in the truncation.
#[derive(Clone, Debug)]
struct MulTables {
    letters: Vec<Letter>,
    right: Vec<Vec<Option<VertexId>>>,
    left: Vec<Vec<Option<VertexId>>>,
}

/// Enumerates all elements of word length `<= horizon.radius`, joining
/// `g` and `g s` for every generator `s`.
pub fn build_truncated_cayley(preset: &GroupPreset, horizon: Horizon) -> Result<CayleyGraph> {
    let oracle = preset.oracle();
    let r = horizon.radius();
    let estimate = oracle.ball_size_estimate(r);
    match max_vertices_override() {
        Some(budget) if estimate > budget => {
            return Err(Error::CapExceeded {
                preset: preset.name().to_string(),
                radius: r,
                cap: oracle.radius_cap(),
                estimate,
            })
        }
        Some(_) => {}
        None if r > oracle.radius_cap() => {
            return Err(Error::CapExceeded {
                preset: preset.name().to_string(),
                radius: r,
                cap: oracle.radius_cap(),
                estimate,
            })
        }
        None => {}
    }
    validate_oracle(oracle, 0x5eed)?;

    let gens = oracle.generators();
    let identity = oracle.normalize(&[]);
    let mut elements = vec![identity.clone()];
    let mut index = HashMap::new();
    index.insert(identity, 0 as VertexId);
    let mut dist = vec![0u32];
    let mut queue = VecDeque::from([0 as VertexId]);
    let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
    while let Some(v) = queue.pop_front() {
        let d = dist[v as usize];
        for &g in &gens {
            let w = oracle.normalize(&[elements[v as usize].letters(), &[g]].concat());
            match index.get(&w) {
                Some(&u) => {
                    if v < u {
                        edges.push((v, u));
                    }
                }
                None if d < r => {
                    let u = elements.len() as VertexId;
                    index.insert(w.clone(), u);
                    elements.push(w);
                    dist.push(d + 1);
                    queue.push_back(u);
                    edges.push((v, u));
                }
                None => {}
            }
        }
    }
    let mut adjacency = vec![Vec::new(); elements.len()];
    for (u, v) in edges {
        if u != v && !adjacency[u as usize].contains(&v) {
            adjacency[u as usize].push(v);
            adjacency[v as usize].push(u);
        }
    }
    let graph = Graph::new(adjacency, 0, Vec::new())?;
    Ok(CayleyGraph {
        preset: preset.clone(),
        graph,
        horizon,
        elements,
        index,
        tables: OnceLock::new(),
    })
}

impl CayleyGraph {
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn preset(&self) -> &GroupPreset {
        &self.preset
    }

    pub fn horizon(&self) -> Horizon {
        self.horizon
    }

    pub fn vertex_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, v: VertexId) -> &Word {
        &self.elements[v as usize]
    }

    pub fn elements(&self) -> &[Word] {
        &self.elements
    }

    pub fn vertex_of(&self, w: &Word) -> Option<VertexId> {
        self.index.get(w).copied()
    }

    /// Word length of a vertex (its distance from the identity).
    pub fn length(&self, v: VertexId) -> u32 {
        self.graph.depth(v)
    }

    pub fn multiply(&self, a: &Word, b: &Word) -> Word {
        self.preset.oracle().multiply(a, b)
    }

    pub fn inverse(&self, a: &Word) -> Word {
        self.preset.oracle().inverse(a)
    }

    /// Elements of the ball of radius `r`, as words.
    pub fn ball_words(&self, r: u32) -> Vec<Word> {
        (0..self.vertex_count() as VertexId)
            .filter(|&v| self.length(v) <= r)
            .map(|v| self.element(v).clone())
            .collect()
    }

    fn tables(&self) -> &MulTables {
        self.tables.get_or_init(|| {
            let letters = self.preset.generators();
            let n = self.vertex_count();
            let table = |left: bool, s: Letter| -> Vec<Option<VertexId>> {
                (0..n)
                    .map(|v| {
                        let x = &self.elements[v];
                        let g = Word(vec![s]);
                        let w = if left {
                            self.multiply(&g, x)
                        } else {
                            self.multiply(x, &g)
                        };
                        self.vertex_of(&w)
                    })
                    .collect()
            };
            MulTables {
                right: letters.iter().map(|&s| table(false, s)).collect(),
                left: letters.iter().map(|&s| table(true, s)).collect(),
                letters,
            }
        })
    }

    /// `v · w`, or `None` outside the truncation.
    pub fn right_mul(&self, v: VertexId, w: &Word) -> Option<VertexId> {
        let t = self.tables();
        let mut cur = v;
        for s in w.letters() {
            match t
                .letters
                .iter()
                .position(|l| l == s)
                .and_then(|i| t.right[i][cur as usize])
            {
                Some(next) => cur = next,
                None => return self.vertex_of(&self.multiply(self.element(v), w)),
            }
        }
        Some(cur)
    }

    /// `w · v`, or `None` outside the truncation.
    pub fn left_mul(&self, w: &Word, v: VertexId) -> Option<VertexId> {
        let t = self.tables();
        let mut cur = v;
        for s in w.letters().iter().rev() {
            match t
                .letters
                .iter()
                .position(|l| l == s)
                .and_then(|i| t.left[i][cur as usize])
            {
                Some(next) => cur = next,
                None => return self.vertex_of(&self.multiply(w, self.element(v))),
            }
        }
        Some(cur)
    }

    /// `A · B` restricted to the truncation.
    pub fn right_product(&self, a: &VertexSet, b: &[Word]) -> VertexSet {
        let mut out = self.graph.empty_set();
        for v in a.iter() {
            for g in b {
                if let Some(u) = self.right_mul(v as VertexId, g) {
                    out.insert(u as usize);
                }
            }
        }
        out
    }

    /// `B · A` restricted to the truncation.
    pub fn left_product(&self, b: &[Word], a: &VertexSet) -> VertexSet {
        let mut out = self.graph.empty_set();
        for v in a.iter() {
            for g in b {
                if let Some(u) = self.left_mul(g, v as VertexId) {
                    out.insert(u as usize);
                }
            }
        }
        out
    }

    /// `A^-1`; exact because inversion preserves word length.
    pub fn inverse_set(&self, a: &VertexSet) -> VertexSet {
        let mut out = self.graph.empty_set();
        for v in a.iter() {
            if let Some(u) = self.vertex_of(&self.inverse(self.element(v as VertexId))) {
                out.insert(u as usize);
            }
        }
        out
    }

    pub fn set_of<F: Fn(&Word) -> bool>(&self, pred: F) -> VertexSet {
        VertexSet::from_iter(
            self.vertex_count(),
            self.elements
                .iter()
                .enumerate()
                .filter(|(_, w)| pred(w))
                .map(|(v, _)| v),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::components;

    fn build(preset: GroupPreset, r: u32) -> CayleyGraph {
        build_truncated_cayley(&preset, Horizon::with_radius(r).unwrap()).unwrap()
    }

    #[test]
    fn line_from_z() {
        let c = build(GroupPreset::free_abelian(1), 3);
        assert_eq!(c.vertex_count(), 7);
        assert_eq!(c.graph().edge_count(), 6);
        assert_eq!(c.element(0), &Word::identity());
    }

    #[test]
    fn vertex_counts_match_closed_forms() {
        assert_eq!(build(GroupPreset::free_abelian(2), 2).vertex_count(), 13);
        assert_eq!(build(GroupPreset::free_group(2), 2).vertex_count(), 17);
        for r in 1..6u32 {
            let z2 = build(GroupPreset::free_abelian(2), r).vertex_count();
            assert_eq!(z2 as u32, 2 * r * r + 2 * r + 1);
        }
    }

    #[test]
    fn ids_are_breadth_first() {
        let c = build(GroupPreset::free_group(2), 4);
        let depths = c.graph().depths();
        assert!(depths.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn unit_ball_in_f2() {
        let c = build(GroupPreset::free_group(2), 3);
        let h = c.horizon();
        let b = c.graph().ball(&h, 0, 1).unwrap();
        let mut words: Vec<String> = b.iter().map(|v| c.element(v as u32).to_string()).collect();
        words.sort();
        assert_eq!(words, vec!["A", "B", "a", "b", "e"]);
    }

    #[test]
    fn removing_the_unit_ball_of_f2_leaves_twelve_subtrees() {
        let c = build(GroupPreset::free_group(2), 6);
        let h = c.horizon();
        let region = c.graph().truncated(&h).difference(&c.graph().ball(&h, 0, 1).unwrap());
        assert_eq!(components(c.graph(), &region).len(), 12);
        // the identity alone splits the tree into one branch per generator
        let region = c.graph().truncated(&h).difference(&c.graph().ball(&h, 0, 0).unwrap());
        assert_eq!(components(c.graph(), &region).len(), 4);
    }

    #[test]
    fn annulus_in_z2_is_connected() {
        let c = build(GroupPreset::free_abelian(2), 8);
        let h = c.horizon();
        let region = c.graph().truncated(&h).difference(&c.graph().ball(&h, 0, 2).unwrap());
        let parts = components(c.graph(), &region);
        assert_eq!(parts.len(), 1);
        assert!(crate::graph::classify_component(c.graph(), &parts[0], &h).is_unbounded());
    }

    #[test]
    fn caps_refuse_with_estimate() {
        let err = build_truncated_cayley(&GroupPreset::free_group(2), Horizon::with_radius(13).unwrap()).unwrap_err();
        match err {
            Error::CapExceeded { estimate, .. } => assert_eq!(estimate, 1 + 2 * (3u128.pow(13) - 1)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn products_and_inverses() {
        let c = build(GroupPreset::free_group(2), 4);
        let a = Word(vec![1]);
        let set = c.set_of(|w| w.letters().first() == Some(&1) && w.len() <= 2);
        let inv = c.inverse_set(&set);
        assert!(inv.iter().all(|v| c.element(v as u32).letters().last() == Some(&-1)));
        let shifted = c.right_product(&VertexSet::singleton(c.vertex_count(), 0), std::slice::from_ref(&a));
        assert_eq!(shifted.to_vec(), vec![c.vertex_of(&a).unwrap() as usize]);
    }

    #[test]
    fn table_products_agree_with_the_oracle() {
        let c = build(GroupPreset::free_abelian(2), 4);
        // (3,1)·a·B leaves the ball halfway but lands back inside
        let x = c.vertex_of(&Word(vec![1, 1, 2])).unwrap();
        let w = Word(vec![1, -2]);
        let want = c.vertex_of(&c.multiply(c.element(x), &w));
        assert_eq!(c.right_mul(x, &w), want);
        for v in 0..c.vertex_count() as VertexId {
            for g in c.ball_words(2) {
                assert_eq!(c.right_mul(v, &g), c.vertex_of(&c.multiply(c.element(v), &g)));
                assert_eq!(c.left_mul(&g, v), c.vertex_of(&c.multiply(&g, c.element(v))));
            }
        }
    }
}
