use std::path::Path;

use super::{build_truncated_cayley, read_graph, CayleyGraph, Graph, Horizon, OracleRegistry};
use crate::error::{Error, Result};

/// A truncated space named by a preset string: `Z`, `Z^2`, `F2`, `F3`,
/// any other registered oracle name, or `file:<path>`.
#[derive(Clone, Debug)]
pub enum Space {
    Group(CayleyGraph),
    Plain {
        name: String,
        graph: Graph,
        horizon: Horizon,
    },
}

impl Space {
    pub fn load(spec: &str, horizon: Horizon, registry: &OracleRegistry) -> Result<Self> {
        if let Some(path) = spec.strip_prefix("file:") {
            let graph = read_graph(Path::new(path))?;
            return Ok(Space::Plain {
                name: spec.to_string(),
                graph,
                horizon,
            });
        }
        let preset = registry.get(spec)?;
        Ok(Space::Group(build_truncated_cayley(&preset, horizon)?))
    }

    pub fn graph(&self) -> &Graph {
        match self {
            Space::Group(c) => c.graph(),
            Space::Plain { graph, .. } => graph,
        }
    }

    pub fn horizon(&self) -> Horizon {
        match self {
            Space::Group(c) => c.horizon(),
            Space::Plain { horizon, .. } => *horizon,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Space::Group(c) => c.preset().name(),
            Space::Plain { name, .. } => name,
        }
    }

    pub fn cayley(&self) -> Option<&CayleyGraph> {
        match self {
            Space::Group(c) => Some(c),
            Space::Plain { .. } => None,
        }
    }

    pub fn require_group(&self) -> Result<&CayleyGraph> {
        self.cayley()
            .ok_or_else(|| Error::Precondition(format!("`{}` is a plain graph, not a group preset", self.name())))
    }

    /// Number of decomposition levels used when no radii are given.
    pub fn default_levels(&self) -> Option<usize> {
        self.cayley().and_then(|c| c.preset().oracle().default_levels())
    }
}
