//! Linear operators on subsets of a truncated space and three-valued
//! eigenset verdicts.
//!
//! An operator only sees the truncation, so its output is trusted inside
//! the ball of radius `R - safety_margin`. A residue that stays well inside
//! that ball is bounded; one that reaches its outer shell is evidence of an
//! unbounded difference.

mod families;
pub mod finite;
mod sets;

use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use families::{
    component_family, cone, cone_families, cone_radii_sample, default_covers, gromov_operator, star_family,
    translation_family, ComponentOperator, ConeKind, ConeOperator, Cover, FamilyBuilder, FamilyContext, FamilyRegistry,
    GromovOperator, StarOperator, TranslationOperator,
};
pub use sets::{parse_set_expr, SetExprContext};

use crate::bitset::VertexSet;
use crate::ends::LevelDecomposition;
use crate::error::{Error, Result};
use crate::graph::Space;

pub trait Operator: Send + Sync {
    fn name(&self) -> String;
    fn apply(&self, a: &VertexSet) -> VertexSet;
    /// Output is exact inside the ball of radius `R - safety_margin`.
    fn safety_margin(&self) -> u32;
}

/// A nonempty finite sample of a family of operators on one space.
#[derive(Clone)]
pub struct OperatorFamily {
    name: String,
    space: Arc<Space>,
    operators: Vec<Arc<dyn Operator>>,
}

impl std::fmt::Debug for OperatorFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OperatorFamily")
            .field("name", &self.name)
            .field(
                "operators",
                &self.operators.iter().map(|o| o.name()).collect::<Vec<_>>(),
            )
            .finish()
    }
}

impl OperatorFamily {
    pub fn new(name: impl Into<String>, space: Arc<Space>, operators: Vec<Arc<dyn Operator>>) -> Result<Self> {
        let name = name.into();
        if operators.is_empty() {
            return Err(Error::Precondition(format!("operator family `{name}` is empty")));
        }
        Ok(Self { name, space, operators })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn space(&self) -> &Arc<Space> {
        &self.space
    }

    pub fn operators(&self) -> &[Arc<dyn Operator>] {
        &self.operators
    }

    /// Concatenation of several families over the same space.
    pub fn merged(name: impl Into<String>, parts: &[OperatorFamily]) -> Result<Self> {
        let space = parts
            .first()
            .map(|p| p.space.clone())
            .ok_or_else(|| Error::Precondition("nothing to merge".into()))?;
        let operators = parts.iter().flat_map(|p| p.operators.iter().cloned()).collect();
        Self::new(name, space, operators)
    }
}

/// Ordered by severity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Eigenset,
    Undetermined,
    NotEigenset,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Eigenset => "eigenset",
            Status::Undetermined => "undetermined",
            Status::NotEigenset => "not_eigenset",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OperatorVerdict {
    pub operator: String,
    pub safety_margin: u32,
    /// `R - safety_margin`; `None` when the margin swallows the horizon.
    pub safe_radius: Option<u32>,
    pub status: Status,
    /// Largest basepoint distance of a residue point inside the safe zone.
    pub residue_radius: Option<u32>,
    pub residue_size: usize,
    pub complement_residue_size: usize,
    #[serde(skip)]
    pub residue: VertexSet,
    #[serde(skip)]
    pub complement_residue: VertexSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EigensetVerdict {
    pub family: String,
    pub status: Status,
    /// Smallest `m` with every residue inside `ball(m)`, for eigensets.
    pub bounding_radius: Option<u32>,
    pub operators: Vec<OperatorVerdict>,
}

/// Verdict thresholds: a residue of radius `b` in a safe zone of radius `S`
/// is bounded when `b <= S - slack` and unbounded when it reaches the outer
/// `shell_width` layers of the safe zone.
pub fn judge_residue(radius: Option<u32>, safe: Option<u32>, slack: u32, shell: u32) -> Status {
    let Some(s) = safe else {
        return Status::Undetermined;
    };
    match radius {
        None => Status::Eigenset,
        Some(b) if b + shell > s => Status::NotEigenset,
        Some(b) if b + slack <= s => Status::Eigenset,
        Some(_) => Status::Undetermined,
    }
}

fn judge(op: &dyn Operator, a: &VertexSet, space: &Space, slack: u32) -> OperatorVerdict {
    let graph = space.graph();
    let horizon = space.horizon();
    let margin = op.safety_margin();
    let safe = horizon.radius().checked_sub(margin);
    let zone = graph.depth_at_most(safe.unwrap_or(0));
    let truncated = graph.truncated(&horizon);
    let a = a.intersection(&truncated);
    let complement = truncated.difference(&a);
    let residue = |set: &VertexSet| {
        let mut image = op.apply(set);
        image.intersect_with(&truncated);
        let mut r = image.symmetric_difference(set);
        r.intersect_with(&zone);
        r
    };
    let (residue, complement_residue) = match safe {
        Some(_) => (residue(&a), residue(&complement)),
        None => (graph.empty_set(), graph.empty_set()),
    };
    let residue_radius = graph.reach(&residue).max(graph.reach(&complement_residue));
    OperatorVerdict {
        operator: op.name(),
        safety_margin: margin,
        safe_radius: safe,
        status: judge_residue(residue_radius, safe, slack, horizon.shell_width()),
        residue_radius,
        residue_size: residue.len(),
        complement_residue_size: complement_residue.len(),
        residue,
        complement_residue,
    }
}

/// Checks `f(A) ≡ A` and `f(X \ A) ≡ X \ A` for every operator.
pub fn is_eigenset(a: &VertexSet, family: &OperatorFamily, slack: u32) -> EigensetVerdict {
    let space = family.space();
    let operators: Vec<OperatorVerdict> = family
        .operators()
        .par_iter()
        .map(|op| judge(op.as_ref(), a, space, slack))
        .collect();
    let status = operators.iter().map(|o| o.status).max().expect("families are nonempty");
    let bounding_radius =
        (status == Status::Eigenset).then(|| operators.iter().filter_map(|o| o.residue_radius).max().unwrap_or(0));
    EigensetVerdict {
        family: family.name().to_string(),
        status,
        bounding_radius,
        operators,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureReport {
    pub union: Status,
    pub intersection: Status,
    pub difference: Status,
    pub holds: bool,
}

/// Union, intersection and difference of two eigensets are never judged
/// not to be eigensets.
pub fn closure_check(a: &VertexSet, c: &VertexSet, family: &OperatorFamily, slack: u32) -> ClosureReport {
    let union = is_eigenset(&a.union(c), family, slack).status;
    let intersection = is_eigenset(&a.intersection(c), family, slack).status;
    let difference = is_eigenset(&c.difference(a), family, slack).status;
    ClosureReport {
        union,
        intersection,
        difference,
        holds: [union, intersection, difference]
            .iter()
            .all(|&s| s != Status::NotEigenset),
    }
}

/// Largest residue radius of `f(C ∪ D) Δ (f(C) ∪ f(D))` inside the safe
/// zone; `None` when the two sides agree there.
pub fn linearity_defect(op: &dyn Operator, c: &VertexSet, d: &VertexSet, space: &Space) -> Option<u32> {
    let graph = space.graph();
    let safe = space.horizon().radius().saturating_sub(op.safety_margin());
    let lhs = op.apply(&c.union(d));
    let rhs = op.apply(c).union(&op.apply(d));
    let mut diff = lhs.symmetric_difference(&rhs);
    diff.intersect_with(&graph.depth_at_most(safe));
    graph.reach(&diff)
}

/// Level at which `a` agrees, inside `ball(safe)` and outside the level's
/// bounded part, with a union of unbounded components.
pub fn matching_component_level(a: &VertexSet, dec: &LevelDecomposition, graph_zone: &VertexSet) -> Option<usize> {
    dec.levels().iter().position(|level| {
        level.unbounded().all(|(_, c)| {
            let inside = c.vertices.intersection(graph_zone);
            let hit = inside.intersection(a);
            hit.is_empty() || hit == inside
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        // safe radius 10, slack 2, shell 1
        assert_eq!(judge_residue(None, Some(10), 2, 1), Status::Eigenset);
        assert_eq!(judge_residue(Some(8), Some(10), 2, 1), Status::Eigenset);
        assert_eq!(judge_residue(Some(9), Some(10), 2, 1), Status::Undetermined);
        assert_eq!(judge_residue(Some(10), Some(10), 2, 1), Status::NotEigenset);
        assert_eq!(judge_residue(Some(0), None, 2, 1), Status::Undetermined);
    }

    #[test]
    fn severity_order() {
        assert!(Status::Eigenset < Status::Undetermined);
        assert!(Status::Undetermined < Status::NotEigenset);
    }
}
