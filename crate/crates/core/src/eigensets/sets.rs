//! Named vertex sets used on the command line:
//!
//! ```text
//! empty | all | ray+ | ray- | evens | odds
//! halfplane x>=0        (coordinates x, y, z, w; ops >= <= > < =)
//! ball 3 | sphere 3
//! component 2 0         (level 2, first unbounded component)
//! branch a              (words whose normal form starts with a; A = a^-1)
//! <path>                (vertex ids separated by whitespace or commas)
//! ```

use std::path::Path;

use crate::bitset::VertexSet;
use crate::ends::LevelDecomposition;
use crate::error::{Error, Result};
use crate::graph::{CayleyGraph, Letter, PresetKind, Space};

pub struct SetExprContext<'a> {
    pub space: &'a Space,
    pub decomposition: Option<&'a LevelDecomposition>,
}

fn free_abelian(space: &Space) -> Result<&CayleyGraph> {
    let c = space.require_group()?;
    match c.preset().kind() {
        PresetKind::FreeAbelian(_) => Ok(c),
        _ => Err(Error::SetExpr(format!(
            "coordinates need a free abelian preset, not {}",
            c.preset().name()
        ))),
    }
}

fn letter(tok: &str) -> Option<Letter> {
    let mut chars = tok.chars();
    let c = chars.next()?;
    if chars.next().is_some() || !c.is_ascii_alphabetic() {
        return None;
    }
    let k = (c.to_ascii_lowercase() as u8 - b'a' + 1) as Letter;
    Some(if c.is_ascii_uppercase() { -k } else { k })
}

fn half_space(c: &CayleyGraph, cond: &str) -> Result<VertexSet> {
    let bad = || Error::SetExpr(format!("expected a condition like x>=0, got `{cond}`"));
    let coord = match cond.chars().next() {
        Some('x') => 1,
        Some('y') => 2,
        Some('z') => 3,
        Some('w') => 4,
        _ => return Err(bad()),
    };
    let rest = &cond[1..];
    let (op, num) = ["<=", ">=", "<", ">", "="]
        .iter()
        .find_map(|op| rest.strip_prefix(op).map(|n| (*op, n)))
        .ok_or_else(bad)?;
    let k: i64 = num.trim().parse().map_err(|_| bad())?;
    if coord as usize > c.preset().oracle().rank() {
        return Err(Error::SetExpr(format!(
            "coordinate out of range for {}",
            c.preset().name()
        )));
    }
    Ok(c.set_of(|w| {
        let x = w.exponent_sum(coord);
        match op {
            "<=" => x <= k,
            ">=" => x >= k,
            "<" => x < k,
            ">" => x > k,
            _ => x == k,
        }
    }))
}

fn read_vertex_list(path: &Path, universe: usize) -> Result<VertexSet> {
    let text = std::fs::read_to_string(path)?;
    let mut set = VertexSet::empty(universe);
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for tok in line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
        {
            let v: usize = tok.parse().map_err(|_| Error::Parse {
                path: path.display().to_string(),
                line: i + 1,
                msg: format!("bad vertex id `{tok}`"),
            })?;
            if v >= universe {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    line: i + 1,
                    msg: format!("vertex {v} does not exist"),
                });
            }
            set.insert(v);
        }
    }
    Ok(set)
}

pub fn parse_set_expr(expr: &str, ctx: &SetExprContext) -> Result<VertexSet> {
    let graph = ctx.space.graph();
    let horizon = ctx.space.horizon();
    let truncated = graph.truncated(&horizon);
    let words: Vec<&str> = expr.split_whitespace().collect();
    let number = |tok: Option<&&str>| -> Result<u32> {
        tok.and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::SetExpr(format!("`{expr}` needs a numeric argument")))
    };
    let set = match words.as_slice() {
        ["empty"] => graph.empty_set(),
        ["all"] => truncated.clone(),
        ["ray+"] => free_abelian(ctx.space)?.set_of(|w| w.exponent_sum(1) >= 0),
        ["ray-"] => free_abelian(ctx.space)?.set_of(|w| w.exponent_sum(1) <= 0),
        ["evens"] | ["odds"] => {
            let parity = u32::from(words[0] == "odds");
            VertexSet::from_iter(
                graph.vertex_count(),
                truncated.iter().filter(|&v| graph.depth(v as u32) % 2 == parity),
            )
        }
        ["halfplane", cond] => half_space(free_abelian(ctx.space)?, cond)?,
        ["ball", ..] => graph.depth_at_most(number(words.get(1))?),
        ["sphere", ..] => {
            let r = number(words.get(1))?;
            graph.depth_at_most(r).difference(&graph.depth_below(r))
        }
        ["component", ..] => {
            let dec = ctx
                .decomposition
                .ok_or_else(|| Error::SetExpr("component sets need a decomposition".into()))?;
            let level = number(words.get(1))? as usize;
            let index = number(words.get(2))? as usize;
            if level == 0 || level > dec.depth() {
                return Err(Error::SetExpr(format!("level must lie in 1..={}", dec.depth())));
            }
            dec.level(level - 1)
                .unbounded()
                .nth(index)
                .map(|(_, c)| c.vertices.clone())
                .ok_or_else(|| Error::SetExpr(format!("level {level} has no unbounded component {index}")))?
        }
        ["branch", l] => {
            let c = ctx.space.require_group()?;
            let g = letter(l).ok_or_else(|| Error::SetExpr(format!("bad generator `{l}`")))?;
            if !c.preset().generators().contains(&g) {
                return Err(Error::SetExpr(format!(
                    "`{l}` is not a generator of {}",
                    c.preset().name()
                )));
            }
            c.set_of(|w| w.letters().first() == Some(&g))
        }
        [path] if Path::new(path).exists() => read_vertex_list(Path::new(path), graph.vertex_count())?,
        _ => return Err(Error::SetExpr(format!("unrecognised set `{expr}`"))),
    };
    Ok(set.intersection(&truncated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ends::decompose;
    use crate::graph::{build_truncated_cayley, GroupPreset, Horizon};

    fn space(p: GroupPreset, r: u32) -> Space {
        Space::Group(build_truncated_cayley(&p, Horizon::with_radius(r).unwrap()).unwrap())
    }

    #[test]
    fn expressions_on_the_line() {
        let s = space(GroupPreset::free_abelian(1), 5);
        let dec = decompose(s.graph(), &s.horizon(), &[1, 2]).unwrap();
        let ctx = SetExprContext {
            space: &s,
            decomposition: Some(&dec),
        };
        let len = |e: &str| parse_set_expr(e, &ctx).unwrap().len();
        assert_eq!(len("ray+"), 6);
        assert_eq!(len("ray-"), 6);
        assert_eq!(len("evens"), 5);
        assert_eq!(len("halfplane x>2"), 3);
        assert_eq!(len("ball 2"), 5);
        assert_eq!(len("sphere 2"), 2);
        assert_eq!(len("component 2 0"), 4);
        assert_eq!(len("all"), 11);
        assert!(parse_set_expr("component 3 0", &ctx).is_err());
        assert!(parse_set_expr("branch b", &ctx).is_err());
        assert!(parse_set_expr("halfplane y>=0", &ctx).is_err());
        assert!(parse_set_expr("nonsense", &ctx).is_err());
    }

    #[test]
    fn branches_of_the_free_group() {
        let s = space(GroupPreset::free_group(2), 3);
        let ctx = SetExprContext {
            space: &s,
            decomposition: None,
        };
        // 1 + 3 + 9 words of length 1..3 start with a given letter
        assert_eq!(parse_set_expr("branch A", &ctx).unwrap().len(), 13);
        assert!(parse_set_expr("ray+", &ctx).is_err());
    }

    #[test]
    fn vertex_list_files() {
        let s = space(GroupPreset::free_abelian(1), 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("set.txt");
        std::fs::write(&path, "0 1, 2 # comment\n3\n").unwrap();
        let ctx = SetExprContext {
            space: &s,
            decomposition: None,
        };
        assert_eq!(
            parse_set_expr(path.to_str().unwrap(), &ctx).unwrap().to_vec(),
            vec![0, 1, 2, 3]
        );
        std::fs::write(&path, "0 99\n").unwrap();
        assert!(parse_set_expr(path.to_str().unwrap(), &ctx).is_err());
    }
}
