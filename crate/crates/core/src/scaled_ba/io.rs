//! Scaled-space files, points written 1-based:
//!
//! ```text
//! universe 4
//! scale {1}
//! scale {2}
//! gen {1,2}
//! tail {3}
//! ```

use std::path::Path;

use serde::Serialize;

use super::{
    compactify, enumerate_ends, generate_algebra, is_compact_at_infinity, is_hausdorff, CompactifyChecks, EndTag,
    ScaledSpace, SetAlgebra,
};
use crate::bitset::PointSet;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct BaInstance {
    pub space: ScaledSpace,
    pub generators: Vec<PointSet>,
    pub algebra: SetAlgebra,
}

pub fn read_scaled_space(path: &Path) -> Result<BaInstance> {
    let text = std::fs::read_to_string(path)?;
    parse_scaled_space(&text, &path.display().to_string())
}

fn parse_set(body: &str, n: usize) -> std::result::Result<PointSet, String> {
    let inner = body
        .trim()
        .strip_prefix('{')
        .and_then(|s| s.strip_suffix('}'))
        .ok_or_else(|| format!("expected a set like {{1,2}}, got `{}`", body.trim()))?;
    let mut set = PointSet::empty(n);
    for tok in inner.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let p: usize = tok.parse().map_err(|_| format!("bad point `{tok}`"))?;
        if p == 0 || p > n {
            return Err(format!("point {p} outside 1..={n}"));
        }
        set.insert(p - 1);
    }
    Ok(set)
}

pub fn parse_scaled_space(text: &str, origin: &str) -> Result<BaInstance> {
    let err = |line: usize, msg: String| Error::Parse {
        path: origin.to_string(),
        line,
        msg,
    };
    let mut universe = None;
    let mut scale = Vec::new();
    let mut generators = Vec::new();
    let mut tails = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
        if key == "universe" {
            if universe.is_some() {
                return Err(err(lineno, "universe declared twice".into()));
            }
            universe = Some(
                rest.trim()
                    .parse::<usize>()
                    .map_err(|_| err(lineno, format!("bad universe size `{}`", rest.trim())))?,
            );
            continue;
        }
        let n = universe.ok_or_else(|| err(lineno, "`universe` must come first".into()))?;
        let set = parse_set(rest, n).map_err(|m| err(lineno, m))?;
        match key {
            "scale" => scale.push(set),
            "gen" => generators.push(set),
            "tail" => tails.push(set),
            other => return Err(err(lineno, format!("unknown directive `{other}`"))),
        }
    }
    let n = universe.ok_or_else(|| err(0, "missing `universe` line".into()))?;
    let mut tail = PointSet::empty(n);
    for t in &tails {
        tail.union_with(t);
    }
    let space = ScaledSpace::new(n, scale, tail).map_err(|e| err(0, e.to_string()))?;
    let algebra = generate_algebra(&generators, &space);
    Ok(BaInstance {
        space,
        generators,
        algebra,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EndReport {
    pub tag: EndTag,
    pub atom: Vec<u64>,
    pub core: Vec<u64>,
    /// Listed only for algebras small enough to enumerate.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<Vec<u64>>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompactificationReport {
    pub added: usize,
    pub verified: bool,
    pub checks: CompactifyChecks,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition2: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BaReport {
    pub universe: usize,
    pub atoms: usize,
    /// `None` when the count does not fit in 64 bits.
    pub elements: Option<u64>,
    pub points_at_infinity: Vec<u64>,
    pub tails: Vec<u64>,
    pub hausdorff: bool,
    pub compact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compactness_witness: Option<Vec<Vec<u64>>>,
    pub ends: Vec<EndReport>,
    pub compactification: CompactificationReport,
}

/// Full analysis of an algebra; `name` maps universe points to the labels
/// used in the report.
pub fn report(algebra: &SetAlgebra, name: &dyn Fn(usize) -> u64, validate_condition2: bool) -> Result<BaReport> {
    let names = |s: &PointSet| s.iter().map(name).collect::<Vec<_>>();
    let listable = algebra.atom_count() <= 10;
    let ends = enumerate_ends(algebra)
        .into_iter()
        .map(|e| {
            let members = if listable {
                Some(e.members(algebra)?.iter().map(names).collect())
            } else {
                None
            };
            Ok(EndReport {
                tag: e.tag,
                atom: names(&e.atom),
                core: names(&e.core),
                members,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let compactness = is_compact_at_infinity(algebra);
    let comp = compactify(algebra)?;
    Ok(BaReport {
        universe: algebra.space().universe(),
        atoms: algebra.atom_count(),
        elements: u64::try_from(algebra.element_count()).ok(),
        points_at_infinity: names(&algebra.space().points_at_infinity()),
        tails: names(algebra.space().tails()),
        hausdorff: is_hausdorff(algebra),
        compact: compactness.compact,
        compactness_witness: compactness.witness.map(|w| w.iter().map(names).collect()),
        ends,
        compactification: CompactificationReport {
            added: comp.added.len(),
            verified: comp.verified,
            checks: comp.checks.clone(),
            condition2: validate_condition2.then(|| comp.validate_condition2()),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_documented_example() {
        let inst = parse_scaled_space(
            "# two bounded points\nuniverse 4\nscale {1}\nscale {2}\ngen {1,2}\ntail {3}\n",
            "x.ba",
        )
        .unwrap();
        assert_eq!(inst.space.universe(), 4);
        assert_eq!(inst.space.tails().to_vec(), vec![2]);
        assert_eq!(inst.space.points_at_infinity().to_vec(), vec![3]);
        assert_eq!(inst.generators.len(), 1);
    }

    #[test]
    fn errors_point_at_the_line() {
        let e = parse_scaled_space("universe 3\nscale {4}\n", "x.ba").unwrap_err();
        assert!(e.to_string().starts_with("x.ba:2:"), "{e}");
        let e = parse_scaled_space("scale {1}\n", "x.ba").unwrap_err();
        assert!(e.to_string().starts_with("x.ba:1:"), "{e}");
        assert!(parse_scaled_space("universe 3\nscale {1}\ntail {1}\n", "x").is_err());
    }

    #[test]
    fn report_lists_ends_one_based() {
        let inst = parse_scaled_space("universe 4\nscale {1}\nscale {2}\ngen {3}\n", "x").unwrap();
        let r = report(&inst.algebra, &|p| p as u64 + 1, true).unwrap();
        assert_eq!(r.ends.len(), 2);
        assert_eq!(r.ends[0].core, vec![3]);
        assert_eq!(r.ends[1].core, vec![4]);
        assert!(r.compact && r.hausdorff);
        assert_eq!(r.compactification.condition2, Some(true));
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["ends"][0]["tag"], "internal");
    }
}
