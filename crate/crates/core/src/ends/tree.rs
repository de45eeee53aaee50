use std::fmt::Write as _;

use serde::Serialize;

use super::LevelDecomposition;
use crate::error::{Error, Result};
use crate::graph::VertexId;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeNode {
    pub id: usize,
    pub depth: usize,
    pub parent: Option<usize>,
    pub size: usize,
    pub representative: VertexId,
}

/// Rooted tree of nested unbounded components. Node 0 is the root (the
/// whole truncation); a node at depth `n` is an unbounded component of
/// level `n`.
#[derive(Clone, Debug, Serialize)]
pub struct EndTree {
    pub radii: Vec<u32>,
    pub nodes: Vec<TreeNode>,
    #[serde(skip)]
    children: Vec<Vec<usize>>,
    /// `component[n][i]`: node id of unbounded component `i` of level `n`.
    #[serde(skip)]
    component: Vec<Vec<Option<usize>>>,
}

impl EndTree {
    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }

    pub fn children(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    pub fn depth(&self) -> usize {
        self.radii.len()
    }

    pub fn nodes_at_depth(&self, depth: usize) -> impl Iterator<Item = &TreeNode> {
        self.nodes.iter().filter(move |n| n.depth == depth)
    }

    /// Node id of unbounded component `i` of level `n` (0-based level).
    pub fn node_of(&self, level: usize, i: usize) -> Option<usize> {
        self.component.get(level).and_then(|c| c.get(i)).copied().flatten()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("tree serializes")
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ends {\n  node [shape=box];\n");
        for n in &self.nodes {
            let label = match n.depth {
                0 => format!("root (size {})", n.size),
                d => format!("level {d} rep {} (size {})", n.representative, n.size),
            };
            let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, label);
        }
        for n in &self.nodes {
            if let Some(p) = n.parent {
                let _ = writeln!(out, "  n{} -> n{};", p, n.id);
            }
        }
        out.push_str("}\n");
        out
    }
}

pub fn end_tree(dec: &LevelDecomposition) -> Result<EndTree> {
    let mut nodes = vec![TreeNode {
        id: 0,
        depth: 0,
        parent: None,
        size: dec.truncated_size(),
        representative: dec.basepoint(),
    }];
    let mut children = vec![Vec::new()];
    let mut component: Vec<Vec<Option<usize>>> = Vec::with_capacity(dec.depth());
    for (n, level) in dec.levels().iter().enumerate() {
        let mut ids = vec![None; level.components.len()];
        let mut fresh = level
            .unbounded()
            .map(|(i, c)| {
                let parent = match n {
                    0 => Some(0),
                    _ => dec.parent(n, i).and_then(|p| component[n - 1][p]),
                };
                parent
                    .map(|p| (p, c.representative, i))
                    .ok_or_else(|| Error::Internal(format!("orphan component at level {}", n + 1)))
            })
            .collect::<Result<Vec<(usize, VertexId, usize)>>>()?;
        fresh.sort_unstable();
        for (parent, rep, i) in fresh {
            let id = nodes.len();
            nodes.push(TreeNode {
                id,
                depth: n + 1,
                parent: Some(parent),
                size: level.components[i].size(),
                representative: rep,
            });
            children.push(Vec::new());
            children[parent].push(id);
            ids[i] = Some(id);
        }
        component.push(ids);
    }
    let tree = EndTree {
        radii: dec.radii(),
        nodes,
        children,
        component,
    };
    let leaf_depth = tree.depth();
    if let Some(n) = tree
        .nodes
        .iter()
        .find(|n| n.depth < leaf_depth && tree.children[n.id].is_empty())
    {
        return Err(Error::Internal(format!(
            "node {} at depth {} has no unbounded descendant",
            n.id, n.depth
        )));
    }
    Ok(tree)
}

/// Root-to-depth-`n` branches of the tree, each listed as node ids at
/// depths `1..=n`.
pub fn ends_at_depth(tree: &EndTree, n: usize) -> Result<Vec<Vec<usize>>> {
    if n == 0 || n > tree.depth() {
        return Err(Error::Precondition(format!(
            "depth must lie in 1..={}, got {n}",
            tree.depth()
        )));
    }
    let mut paths: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..n {
        paths = paths
            .into_iter()
            .flat_map(|p| {
                let last = p.last().copied().unwrap_or(0);
                tree.children(last).iter().map(move |&c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ends::decompose;
    use crate::graph::{build_truncated_cayley, GroupPreset, Horizon};

    fn tree(preset: GroupPreset, r: u32, radii: &[u32]) -> EndTree {
        let c = build_truncated_cayley(&preset, Horizon::with_radius(r).unwrap()).unwrap();
        end_tree(&decompose(c.graph(), &c.horizon(), radii).unwrap()).unwrap()
    }

    #[test]
    fn free_group_tree_branches_by_three() {
        let t = tree(GroupPreset::free_group(2), 8, &[1, 2, 3]);
        assert_eq!(t.children(0).len(), 4);
        for n in t.nodes_at_depth(1) {
            assert_eq!(t.children(n.id).len(), 3);
        }
        assert_eq!(ends_at_depth(&t, 3).unwrap().len(), 36);
        assert!(ends_at_depth(&t, 4).is_err());
    }

    #[test]
    fn ids_are_deterministic_and_children_sorted() {
        let a = tree(GroupPreset::free_group(2), 7, &[1, 2]);
        let b = tree(GroupPreset::free_group(2), 7, &[1, 2]);
        assert_eq!(a.nodes, b.nodes);
        for n in &a.nodes {
            let reps: Vec<_> = a.children(n.id).iter().map(|&c| a.nodes[c].representative).collect();
            assert!(reps.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn json_and_dot() {
        let t = tree(GroupPreset::free_abelian(1), 10, &[1, 2, 3]);
        let j = t.to_json();
        let nodes = j["nodes"].as_array().unwrap();
        assert_eq!(nodes.len(), 7);
        let keys: Vec<_> = nodes[1].as_object().unwrap().keys().cloned().collect();
        assert_eq!(keys, ["depth", "id", "parent", "representative", "size"]);
        let dot = t.to_dot();
        assert!(dot.starts_with("digraph ends {"));
        assert_eq!(dot.matches("->").count(), 6);
    }
}
