//! Line-oriented graph files:
//!
//! ```text
//! # comment
//! v 0 origin
//! v 1
//! e 0 1
//! basepoint 0
//! ```

use std::path::Path;

use super::{Graph, VertexId};
use crate::error::{Error, Result};

pub fn read_graph(path: &Path) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    parse_graph(&text, &path.display().to_string())
}

pub fn parse_graph(text: &str, origin: &str) -> Result<Graph> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let mut labels: Vec<Option<Option<String>>> = Vec::new();
    let mut edges = Vec::new();
    let mut basepoint = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let id = |tok: Option<&str>| -> Result<VertexId> {
            tok.ok_or_else(|| err(lineno, "missing vertex id".into()))?
                .parse()
                .map_err(|_| err(lineno, format!("bad vertex id in `{line}`")))
        };
        match parts.next() {
            Some("v") => {
                let v = id(parts.next())? as usize;
                let rest: Vec<&str> = parts.collect();
                let label = (!rest.is_empty()).then(|| rest.join(" "));
                if labels.len() <= v {
                    labels.resize(v + 1, None);
                }
                if labels[v].is_some() {
                    return Err(err(lineno, format!("vertex {v} declared twice")));
                }
                labels[v] = Some(label);
            }
            Some("e") => {
                let u = id(parts.next())?;
                let v = id(parts.next())?;
                if parts.next().is_some() {
                    return Err(err(lineno, "trailing tokens after edge".into()));
                }
                edges.push((lineno, u, v));
            }
            Some("basepoint") => {
                basepoint = Some(id(parts.next())?);
            }
            Some(other) => return Err(err(lineno, format!("unknown directive `{other}`"))),
            None => {}
        }
    }
    if let Some(v) = labels.iter().position(Option::is_none) {
        return Err(err(0, format!("vertex ids must be dense: {v} is missing")));
    }
    let n = labels.len();
    let mut adjacency = vec![Vec::new(); n];
    for (lineno, u, v) in edges {
        if u as usize >= n || v as usize >= n {
            return Err(err(lineno, format!("edge {u}-{v} uses an undeclared vertex")));
        }
        if u == v {
            return Err(err(lineno, format!("self-loop at {u}")));
        }
        if adjacency[u as usize].contains(&v) {
            return Err(err(lineno, format!("duplicate edge {u}-{v}")));
        }
        adjacency[u as usize].push(v);
        adjacency[v as usize].push(u);
    }
    let basepoint = basepoint.ok_or_else(|| err(0, "missing `basepoint` line".into()))?;
    let labels = labels.into_iter().map(Option::unwrap).collect();
    Graph::new(adjacency, basepoint, labels).map_err(|e| err(0, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_labels_comments_and_basepoint() {
        let g = parse_graph(
            "# a triangle with a tail\nv 0 root\nv 1\nv 2\nv 3 tail end\n\ne 0 1\ne 1 2\ne 2 0\ne 2 3 # pendant\nbasepoint 0\n",
            "inline",
        )
        .unwrap();
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.label(0), Some("root"));
        assert_eq!(g.label(3), Some("tail end"));
        assert_eq!(g.depth(3), 2);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_graph("v 0\nv 1\ne 0 5\nbasepoint 0\n", "g.txt").unwrap_err();
        assert!(e.to_string().starts_with("g.txt:3:"), "{e}");
        let e = parse_graph("v 0\nfrob 1\n", "g.txt").unwrap_err();
        assert!(e.to_string().starts_with("g.txt:2:"), "{e}");
        assert!(parse_graph("v 0\nv 2\nbasepoint 0\n", "g").is_err());
        assert!(parse_graph("v 0\n", "g").is_err());
    }
}
