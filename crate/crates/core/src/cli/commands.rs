use std::fmt::Write as _;
use std::sync::Arc;

use clap::ValueEnum;
use serde::Serialize;
use serde_json::json;

use super::{
    BaArgs, Cli, Command, EigensetArgs, EigensetCommand, EndsCommand, Format, FuzzArgs, GlobalOpts, GroupArgs,
    GroupCommand, GroupTest, SpaceArgs, EXIT_FAILURE, EXIT_OK,
};
use crate::eigensets::{
    closure_check, is_eigenset, parse_set_expr, EigensetVerdict, FamilyContext, FamilyRegistry, SetExprContext,
};
use crate::ends::{classify, decompose, default_radii, end_tree, EndTree, LevelDecomposition};
use crate::error::{Error, Result};
use crate::fuzz::{run_suite, FuzzConfig, FuzzContext, SuiteRegistry};
use crate::graph::{Horizon, OracleRegistry, PresetKind, Space, Word};
use crate::groups::{
    action_checks, bounded_geometry, end_comparison, induced_cover_comparison, inversion_duality_check,
    locally_bounded, parse_word, same_eigensets_check, star_identity_check, subgroup_scale_check, ActionRegistry,
    ActionSpec, GroupAction, ScaledGroup,
};
use crate::scaled_ba::{graph_algebra_adapter, read_scaled_space, report, BaReport, EndTag};

type Rendered = (i32, String);

pub(super) fn dispatch(cli: &Cli) -> Result<Rendered> {
    let g = &cli.global;
    match &cli.command {
        Command::Ends { command } => match command {
            EndsCommand::Count(s) => ends_count(g, s),
            EndsCommand::Tree(s) => ends_tree(g, s),
        },
        Command::Ba(a) => ba(g, a),
        Command::Eigenset { command } => match command {
            EigensetCommand::Check(a) => eigenset_check(g, a),
            EigensetCommand::Families => {
                no_dot(g)?;
                let reg = FamilyRegistry::default();
                let list: Vec<_> = reg
                    .names()
                    .map(|n| {
                        (
                            n.to_string(),
                            reg.get(n).map(|b| b.summary().to_string()).unwrap_or_default(),
                        )
                    })
                    .collect();
                Ok((EXIT_OK, listing(g.format, &list)))
            }
        },
        Command::Group { command } => match command {
            GroupCommand::Check(a) => group_check(g, a),
            GroupCommand::Actions => {
                no_dot(g)?;
                let reg = ActionRegistry::default();
                let list: Vec<_> = reg
                    .names()
                    .map(|n| {
                        (
                            n.to_string(),
                            reg.get(n).map(|b| b.summary().to_string()).unwrap_or_default(),
                        )
                    })
                    .collect();
                Ok((EXIT_OK, listing(g.format, &list)))
            }
        },
        Command::Fuzz(a) => fuzz(g, a),
    }
}

fn listing(format: Format, items: &[(String, String)]) -> String {
    match format {
        Format::Json => {
            let v: Vec<_> = items.iter().map(|(n, s)| json!({"name": n, "summary": s})).collect();
            to_json(&v)
        }
        _ => items.iter().map(|(n, s)| format!("{n}: {s}\n")).collect(),
    }
}

fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn no_dot(g: &GlobalOpts) -> Result<()> {
    if g.format == Format::Dot {
        return Err(Error::Precondition(
            "dot output is only available for `ends tree`".into(),
        ));
    }
    Ok(())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Horizon radius used when `--R` is absent.
pub fn default_radius(preset: &str) -> u32 {
    match preset {
        "Z" => 40,
        "Z2" | "Z^2" => 30,
        "F2" | "F3" => 10,
        _ => 20,
    }
}

struct Loaded {
    space: Arc<Space>,
    radii: Vec<u32>,
}

fn space_spec(s: &SpaceArgs) -> Result<String> {
    match (&s.preset, &s.graph) {
        (Some(p), None) => Ok(p.clone()),
        (None, Some(path)) => Ok(format!("file:{}", path.display())),
        _ => Err(Error::Precondition("give --preset or --graph".into())),
    }
}

fn load_named(g: &GlobalOpts, spec: &str) -> Result<Arc<Space>> {
    let r = g.radius.unwrap_or_else(|| default_radius(spec));
    Ok(Arc::new(Space::load(
        spec,
        Horizon::new(r, g.shell)?,
        &OracleRegistry::default(),
    )?))
}

fn load(g: &GlobalOpts, s: &SpaceArgs) -> Result<Loaded> {
    let space = load_named(g, &space_spec(s)?)?;
    let radii = match &s.radii {
        Some(r) => r.clone(),
        None => default_radii(&space.horizon(), s.levels.or_else(|| space.default_levels())),
    };
    Ok(Loaded { space, radii })
}

fn decomposition(l: &Loaded) -> Result<LevelDecomposition> {
    decompose(l.space.graph(), &l.space.horizon(), &l.radii)
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>, sep: &str) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep)
}

fn ends_count(g: &GlobalOpts, s: &SpaceArgs) -> Result<Rendered> {
    no_dot(g)?;
    let l = load(g, s)?;
    let dec = decomposition(&l)?;
    let class = classify(&dec);
    let out = match g.format {
        Format::Json => to_json(&json!({
            "space": l.space.name(),
            "R": dec.horizon().radius(),
            "shell": dec.horizon().shell_width(),
            "radii": dec.radii(),
            "truncated_size": dec.truncated_size(),
            "levels": dec.level_counts(),
            "counts": class.counts,
            "verdict": class.verdict,
            "stabilization_level": class.stabilization_level,
            "note": class.note,
        })),
        _ => {
            let mut out = format!(
                "counts: {}; verdict: {}\n",
                join(&class.counts, " "),
                class.verdict.as_str()
            );
            if let Some(note) = &class.note {
                let _ = writeln!(out, "note: {note}");
            }
            out
        }
    };
    Ok((EXIT_OK, out))
}

fn tree_text(tree: &EndTree) -> String {
    fn walk(tree: &EndTree, id: usize, out: &mut String) {
        let n = &tree.nodes[id];
        let indent = "  ".repeat(n.depth);
        let _ = match n.depth {
            0 => writeln!(out, "root: size {}", n.size),
            d => writeln!(
                out,
                "{indent}level {d} (radius {}): representative {}, size {}",
                tree.radii[d - 1],
                n.representative,
                n.size
            ),
        };
        for &c in tree.children(id) {
            walk(tree, c, out);
        }
    }
    let mut out = String::new();
    walk(tree, 0, &mut out);
    out
}

fn ends_tree(g: &GlobalOpts, s: &SpaceArgs) -> Result<Rendered> {
    let l = load(g, s)?;
    let tree = end_tree(&decomposition(&l)?)?;
    let out = match g.format {
        Format::Json => to_json(&tree.to_json()),
        Format::Dot => tree.to_dot(),
        Format::Text => tree_text(&tree),
    };
    Ok((EXIT_OK, out))
}

fn set_text(points: &[u64]) -> String {
    format!("{{{}}}", join(points, ","))
}

fn ends_line(r: &BaReport) -> String {
    let internal = r.ends.iter().filter(|e| e.tag == EndTag::Internal).count();
    let external = r.ends.len() - internal;
    let ends = match (r.ends.len(), internal, external) {
        (1, 1, _) => "1 end, internal".to_string(),
        (1, _, _) => "1 end, external".to_string(),
        (k, _, 0) => format!("{k} internal ends"),
        (k, 0, _) => format!("{k} external ends"),
        (k, i, e) => format!("{k} ends ({i} internal, {e} external)"),
    };
    format!("{ends}; compact at infinity: {}", yes_no(r.compact))
}

fn ba_text(source: &str, r: &BaReport) -> String {
    let mut out = String::new();
    let elements = r
        .elements
        .map_or_else(|| "more than 2^64".to_string(), |e| e.to_string());
    let _ = writeln!(
        out,
        "{source}: {} points, {} atoms, {elements} elements",
        r.universe, r.atoms
    );
    let _ = writeln!(
        out,
        "points at infinity: {}; tails: {}",
        set_text(&r.points_at_infinity),
        set_text(&r.tails)
    );
    let _ = writeln!(out, "{}", ends_line(r));
    let _ = writeln!(out, "hausdorff: {}", yes_no(r.hausdorff));
    for (i, e) in r.ends.iter().enumerate() {
        let tag = match e.tag {
            EndTag::Internal => "internal",
            EndTag::External => "external",
        };
        let _ = writeln!(
            out,
            "end {}: {tag}, atom {}, core {}",
            i + 1,
            set_text(&e.atom),
            set_text(&e.core)
        );
    }
    let c = &r.compactification;
    let noun = if c.added == 1 { "end" } else { "ends" };
    let status = if c.checks.isomorphism { "verified" } else { "failed" };
    let _ = writeln!(out, "{} external {noun} added; isomorphism: {status}", c.added);
    let _ = writeln!(
        out,
        "compactification: {}; closure of intersections: {}; compact: {}; external ends left: {}",
        if c.verified {
            "verified"
        } else {
            "not verified (input is not Hausdorff)"
        },
        yes_no(c.checks.closure_meets),
        yes_no(c.checks.compact),
        if c.checks.no_external_ends { "none" } else { "some" },
    );
    if let Some(ok) = c.condition2 {
        let _ = writeln!(
            out,
            "added points only in elements meeting the original space: {}",
            yes_no(ok)
        );
    }
    out
}

fn ba(g: &GlobalOpts, a: &BaArgs) -> Result<Rendered> {
    no_dot(g)?;
    let (source, rep) = match (&a.file, &a.preset) {
        (Some(path), None) => {
            let inst = read_scaled_space(path)?;
            (
                path.display().to_string(),
                report(&inst.algebra, &|p| p as u64 + 1, a.condition2)?,
            )
        }
        (None, Some(preset)) => {
            let space = load_named(g, preset)?;
            let depth = a.depth.unwrap_or(3);
            let levels = space.default_levels().map(|l| l.max(depth)).or(Some(depth));
            let dec = decompose(
                space.graph(),
                &space.horizon(),
                &default_radii(&space.horizon(), levels),
            )?;
            let ga = graph_algebra_adapter(&dec, depth)?;
            let vertices = ga.vertices.clone();
            let rep = report(&ga.algebra, &|p| vertices[p] as u64, a.condition2)?;
            (format!("{preset} at depth {depth}"), rep)
        }
        _ => {
            return Err(Error::Precondition(
                "give a scaled-space file or --preset with --depth".into(),
            ))
        }
    };
    let c = &rep.compactification;
    let failed = c.verified && !c.checks.isomorphism || (rep.hausdorff && !c.verified) || c.condition2 == Some(false);
    let out = match g.format {
        Format::Json => to_json(&json!({ "source": source, "report": rep })),
        _ => ba_text(&source, &rep),
    };
    Ok((if failed { EXIT_FAILURE } else { EXIT_OK }, out))
}

fn set_context<'a>(space: &'a Space, dec: Option<&'a LevelDecomposition>) -> SetExprContext<'a> {
    SetExprContext {
        space,
        decomposition: dec,
    }
}

fn verdict_text(label: &str, v: &EigensetVerdict) -> String {
    let opt = |x: Option<u32>| x.map_or_else(|| "-".to_string(), |r| r.to_string());
    let mut out = format!("{label} under {}: {}", v.family, v.status.as_str());
    if let Some(b) = v.bounding_radius {
        let _ = write!(out, " (residues inside ball {b})");
    }
    out.push('\n');
    for o in &v.operators {
        let _ = writeln!(
            out,
            "  {}: {}; safe radius {}, residue radius {}, residue sizes {}/{}",
            o.operator,
            o.status.as_str(),
            opt(o.safe_radius),
            opt(o.residue_radius),
            o.residue_size,
            o.complement_residue_size
        );
    }
    out
}

fn eigenset_check(g: &GlobalOpts, a: &EigensetArgs) -> Result<Rendered> {
    no_dot(g)?;
    let l = load(g, &a.space)?;
    let mut ctx = FamilyContext::new(l.space.clone());
    if a.space.radii.is_some() || a.space.levels.is_some() {
        ctx = ctx.with_radii(l.radii.clone());
    }
    let family = FamilyRegistry::default().build(&a.family, &ctx)?;
    let dec = ctx.decomposition()?;
    let sets = set_context(&l.space, Some(&dec));
    let set = parse_set_expr(&a.set, &sets)?;
    let verdict = is_eigenset(&set, &family, g.slack);
    let closure = match &a.with {
        Some(expr) => {
            let other = parse_set_expr(expr, &sets)?;
            Some(closure_check(&set, &other, &family, g.slack))
        }
        None => None,
    };
    let code = match &closure {
        Some(c) if !c.holds => EXIT_FAILURE,
        _ => EXIT_OK,
    };
    let out = match g.format {
        Format::Json => to_json(&json!({
            "space": l.space.name(),
            "R": l.space.horizon().radius(),
            "slack": g.slack,
            "set": a.set,
            "verdict": verdict,
            "closure": closure,
        })),
        _ => {
            let mut out = verdict_text(&a.set, &verdict);
            if let (Some(c), Some(w)) = (&closure, &a.with) {
                let _ = writeln!(
                    out,
                    "with {w}: union {}, intersection {}, difference {}; closure holds: {}",
                    c.union.as_str(),
                    c.intersection.as_str(),
                    c.difference.as_str(),
                    yes_no(c.holds)
                );
            }
            out
        }
    };
    Ok((code, out))
}

fn default_set(space: &Space) -> &'static str {
    match space.cayley().map(|c| c.preset().kind()) {
        Some(PresetKind::FreeAbelian(_)) => "ray+",
        _ => "branch a",
    }
}

fn words(list: &[String], group: &ScaledGroup) -> Result<Vec<Word>> {
    list.iter().map(|w| parse_word(w, group.cayley())).collect()
}

fn build_action(a: &GroupArgs, group: &ScaledGroup) -> Result<GroupAction> {
    let registry = ActionRegistry::default();
    if let Some(path) = &a.action_file {
        let text = std::fs::read_to_string(path)?;
        let spec = ActionSpec::parse(&text, &path.display().to_string())?;
        if spec.group != a.preset {
            return Err(Error::Precondition(format!(
                "{}: action file is for `{}`, not `{}`",
                path.display(),
                spec.group,
                a.preset
            )));
        }
        return spec.build(group, &registry);
    }
    registry.build(a.action.as_deref().unwrap_or("left-mult"), group)
}

fn group_check(g: &GlobalOpts, a: &GroupArgs) -> Result<Rendered> {
    no_dot(g)?;
    let space = load_named(g, &a.preset)?;
    let group = ScaledGroup::word_balls(space.clone())?;
    let c = group.cayley();
    let levels = space.default_levels();
    let dec = decompose(
        space.graph(),
        &space.horizon(),
        &default_radii(&space.horizon(), levels),
    )?;
    let set_expr = a.set.clone().unwrap_or_else(|| default_set(&space).to_string());
    let set = || parse_set_expr(&set_expr, &set_context(&space, Some(&dec)));
    let b = match &a.b {
        Some(list) => words(list, &group)?,
        None => c.ball_words(1),
    };
    let b_text = join(b.iter().map(Word::to_string), ",");
    let (holds, text, value): (bool, String, serde_json::Value) = match a.test {
        GroupTest::StarIdentity => {
            let r = star_identity_check(&group, &set()?, &b)?;
            let text = format!(
                "star identity on {set_expr} with B = {{{b_text}}}: {}; safe radius {}; star side {} points, product side {} points, residue {}\n",
                if r.holds { "holds" } else { "fails" },
                r.safe_radius,
                r.star_side.len(),
                r.product_side.len(),
                r.residue.len()
            );
            (r.holds, text, serde_json::to_value(&r).expect("serializes"))
        }
        GroupTest::Duality => {
            let r = inversion_duality_check(&group, &set()?, g.slack)?;
            let text = format!(
                "{set_expr} under left scale multiplication: {}; its inverse under right: {}; duality {}\n",
                r.left.as_str(),
                r.right.as_str(),
                if r.holds { "holds" } else { "fails" }
            );
            (r.holds, text, serde_json::to_value(&r).expect("serializes"))
        }
        GroupTest::Action => {
            let action = build_action(a, &group)?;
            let r = action_checks(&action);
            let mut text = format!(
                "action {}: law {}, images bounded {}, proper {}, cobounded {}\n",
                action.name(),
                if r.law_holds { "holds" } else { "fails" },
                yes_no(r.images_bounded),
                r.proper.as_str(),
                r.cobounded.as_str()
            );
            let k0 = r.k0_radius.map_or_else(|| "-".to_string(), |k| k.to_string());
            let _ = writeln!(
                text,
                "K0 radius {k0}; orbit gap {} then {}",
                r.orbit_gap[0], r.orbit_gap[1]
            );
            for s in &r.stabilizers {
                let _ = writeln!(
                    text,
                    "stabilizer of ball {}: {} elements, radius {}",
                    s.k, s.size, s.radius
                );
            }
            (
                r.law_holds && r.images_bounded,
                text,
                json!({"action": action.name(), "checks": r}),
            )
        }
        GroupTest::Covers => {
            let action = build_action(a, &group)?;
            let r = induced_cover_comparison(&action, &b)?;
            let text = format!(
                "covers for {} with B = {{{b_text}}}: {}; stabilizer {} elements of radius {}; {} centres sampled, {} refinement and {} orbit-map failures\n",
                action.name(),
                if r.holds { "holds" } else { "fails" },
                r.stabilizer_size,
                r.stabilizer_radius,
                r.sampled,
                r.refinement_failures,
                r.orbit_map_failures
            );
            (r.holds, text, json!({"action": action.name(), "comparison": r}))
        }
        GroupTest::SameEigensets => {
            let action = Arc::new(build_action(a, &group)?);
            let r = same_eigensets_check(&action, &set()?, g.slack)?;
            let text = format!(
                "{set_expr} under {}: per element {}, per scale set {}; {}\n",
                action.name(),
                r.per_element.as_str(),
                r.per_scale.as_str(),
                if r.holds { "same" } else { "different" }
            );
            (r.holds, text, json!({"action": action.name(), "result": r}))
        }
        GroupTest::EndComparison => {
            let action = Arc::new(build_action(a, &group)?);
            let r = end_comparison(&action, &dec, a.level, g.slack)?;
            let side = |s: &crate::groups::EndSide| {
                format!(
                    "{}: {} ends from {} eigensets of {} candidates ({} undetermined)",
                    s.family, s.ends, s.eigensets, s.candidates, s.undetermined
                )
            };
            let text = format!(
                "level {}: engine {} ends\ngroup side {}\nspace side {}\nagreement: {}\n",
                r.level,
                r.engine_count,
                side(&r.group_side),
                side(&r.space_side),
                yes_no(r.agree)
            );
            // an experiment: disagreement is reported, not a failure
            (true, text, json!({"action": action.name(), "comparison": r}))
        }
        GroupTest::Scale => {
            let r = group.scale_check();
            let mut text = format!(
                "scale of word balls {:?}: {}; covers the truncation: {}\n",
                group.basis_radii(),
                if r.holds { "closed" } else { "not closed" },
                yes_no(r.covers)
            );
            for p in &r.products {
                let _ = writeln!(
                    text,
                    "ball {} · ball {}^-1 reaches {}: {}",
                    p.left,
                    p.right,
                    p.product_radius,
                    if p.holds { "ok" } else { "too far" }
                );
            }
            (r.holds, text, serde_json::to_value(&r).expect("serializes"))
        }
        GroupTest::Subgroup => {
            let gens = match &a.gens {
                Some(list) => words(list, &group)?,
                None => words(&[default_subgroup(&space).to_string()], &group)?,
            };
            let r = subgroup_scale_check(&group, &gens);
            let text = format!(
                "subgroup <{}>: restricted scale {}\n",
                join(gens.iter().map(Word::to_string), ","),
                if r.holds { "closed" } else { "not closed" }
            );
            (r.holds, text, serde_json::to_value(&r).expect("serializes"))
        }
        GroupTest::LocallyBounded => {
            let r = locally_bounded(&group, &b);
            let text = format!(
                "subgroup generated by {{{b_text}}}: bounded {}; reach {}, {} elements seen\n",
                r.verdict.as_str(),
                r.reach,
                r.elements_seen
            );
            (true, text, serde_json::to_value(&r).expect("serializes"))
        }
        GroupTest::BoundedGeometry => {
            let r = bounded_geometry(&group, 1, &[2, 4]);
            let mut text = format!(
                "bounded geometry with K = ball {}: {}\n",
                r.k_radius,
                r.verdict.as_str()
            );
            for s in &r.samples {
                let _ = writeln!(
                    text,
                    "ball {}: {} points, {} translates",
                    s.radius, s.size, s.translates
                );
            }
            (
                r.verdict != crate::groups::Tri::No,
                text,
                serde_json::to_value(&r).expect("serializes"),
            )
        }
    };
    let out = match g.format {
        Format::Json => to_json(&json!({
            "preset": a.preset,
            "R": space.horizon().radius(),
            "test": a.test.to_possible_value().map(|v| v.get_name().to_string()),
            "holds": holds,
            "result": value,
        })),
        _ => text,
    };
    Ok((if holds { EXIT_OK } else { EXIT_FAILURE }, out))
}

fn default_subgroup(space: &Space) -> &'static str {
    match space.cayley().map(|c| c.preset().kind()) {
        Some(PresetKind::FreeAbelian(1)) => "aa",
        _ => "a",
    }
}

fn fuzz(g: &GlobalOpts, a: &FuzzArgs) -> Result<Rendered> {
    no_dot(g)?;
    let registry = SuiteRegistry::default();
    if a.list {
        let list: Vec<_> = registry
            .suites()
            .map(|s| (s.name().to_string(), s.summary().to_string()))
            .collect();
        return Ok((EXIT_OK, listing(g.format, &list)));
    }
    let suites = if a.suites.is_empty() {
        registry.suites().cloned().collect::<Vec<_>>()
    } else {
        a.suites
            .iter()
            .map(|n| registry.get(n).cloned())
            .collect::<Result<Vec<_>>>()?
    };
    let mut config = FuzzConfig {
        seed: g.seed,
        instances: a.instances,
        radius: g.radius,
        shell: g.shell,
        slack: g.slack,
        ..FuzzConfig::default()
    };
    if !a.presets.is_empty() {
        config.presets = a.presets.clone();
    }
    let ctx = FuzzContext::new(config)?;
    let reports: Vec<_> = suites.iter().map(|s| run_suite(s.as_ref(), &ctx)).collect();
    let failed = reports.iter().any(|r| !r.ok());
    let out = match g.format {
        Format::Json => to_json(&json!({ "seed": g.seed, "suites": reports })),
        _ => {
            let mut out = String::new();
            for r in &reports {
                let _ = write!(out, "{}: {}/{} passed", r.suite, r.passed, r.instances);
                if r.skipped > 0 {
                    let _ = write!(out, " ({} skipped)", r.skipped);
                }
                out.push('\n');
                if let Some(f) = &r.first_failure {
                    let _ = writeln!(out, "  first failure, instance {}:", f.instance);
                    for line in f.reproducer.lines() {
                        let _ = writeln!(out, "    {line}");
                    }
                }
            }
            let _ = writeln!(
                out,
                "seed {}: {}",
                g.seed,
                if failed { "failures found" } else { "all suites passed" }
            );
            out
        }
    };
    Ok((if failed { EXIT_FAILURE } else { EXIT_OK }, out))
}
