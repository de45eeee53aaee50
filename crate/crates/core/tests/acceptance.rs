//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use endslab::fuzz::{instance_rng, run_suite, BaCase, FuzzConfig, FuzzContext, SuiteRegistry, DEFAULT_INSTANCES};
use endslab::graph::{Horizon, OracleRegistry, Space};
use endslab::oracles;
use serde_json::Value;

type Check = std::result::Result<String, String>;

fn endslab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_endslab"))
        .args(args)
        .output()
        .expect("binary runs");
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn json(args: &[&str]) -> std::result::Result<Value, String> {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let (code, out, err) = endslab(&full);
    if code != 0 {
        return Err(format!("{args:?} exited {code}: {}", err.trim()));
    }
    serde_json::from_str(&out).map_err(|e| format!("{args:?}: {e}"))
}

fn suites(names: &[&str], config: FuzzConfig) -> Check {
    let ctx = FuzzContext::new(config).map_err(|e| e.to_string())?;
    let registry = SuiteRegistry::default();
    let mut summary = Vec::new();
    for name in names {
        let suite = registry.get(name).map_err(|e| e.to_string())?;
        let report = run_suite(suite.as_ref(), &ctx);
        if !report.ok() {
            let repro = report.first_failure.map(|f| f.reproducer).unwrap_or_default();
            return Err(format!("{name}: {} failed\n{repro}", report.failed));
        }
        if report.passed == 0 {
            return Err(format!("{name}: no instance was decided"));
        }
        summary.push(format!("{name} {}/{}", report.passed, report.instances));
    }
    Ok(summary.join(", "))
}

fn end_counts() -> Check {
    let cases = [
        ("Z", 40, "1,2,3,4,5", "two"),
        ("Z2", 30, "1,2,3,4,5", "one"),
        ("F2", 10, "1,2,3", "many_growing"),
    ];
    let registry = OracleRegistry::default();
    let mut notes = Vec::new();
    for (preset, r, radii, verdict) in cases {
        let start = Instant::now();
        let v = json(&[
            "ends",
            "count",
            "--preset",
            preset,
            "--R",
            &r.to_string(),
            "--radii",
            radii,
        ])?;
        let took = start.elapsed();
        if took >= Duration::from_secs(5) {
            return Err(format!("{preset}: {took:?}"));
        }
        if v["verdict"] != verdict {
            return Err(format!("{preset}: verdict {}", v["verdict"]));
        }
        let counts: Vec<usize> = v["counts"]
            .as_array()
            .ok_or("counts missing")?
            .iter()
            .map(|c| c.as_u64().unwrap_or(0) as usize)
            .collect();
        let radii: Vec<u32> = radii.split(',').map(|s| s.parse().unwrap()).collect();
        let horizon = Horizon::new(r, 1).map_err(|e| e.to_string())?;
        let space = Space::load(preset, horizon, &registry).map_err(|e| e.to_string())?;
        let brute = oracles::brute_counts(space.graph(), &horizon, &radii);
        if counts != brute {
            return Err(format!("{preset}: counts {counts:?}, BFS oracle {brute:?}"));
        }
        if preset == "F2" {
            let closed: Vec<usize> = radii.iter().map(|&n| oracles::free_group_count(2, n)).collect();
            if counts != closed || counts != [4, 12, 36] {
                return Err(format!("F2: counts {counts:?}, closed form {closed:?}"));
            }
        }
        notes.push(format!("{preset} {counts:?} {verdict} in {:.2}s", took.as_secs_f64()));
    }
    Ok(notes.join("; "))
}

/// Direct comparison with the subfamily oracle on the instances small
/// enough for it; returns how many were covered.
fn subfamily_coverage() -> std::result::Result<usize, String> {
    let mut covered = 0;
    for i in 0..DEFAULT_INSTANCES {
        let case = BaCase::random(&mut instance_rng(0, "subfamily-coverage", i), 8, 3);
        let alg = case.algebra().map_err(|e| e.to_string())?;
        let Ok(brute) = oracles::subfamily_ends(&alg) else {
            continue;
        };
        if oracles::ends_as_families(&alg).map_err(|e| e.to_string())? != brute {
            return Err(format!("ends differ from the subfamily oracle on\n{}", case.to_file()));
        }
        covered += 1;
    }
    Ok(covered)
}

fn compactification() -> Check {
    let fuzz = suites(&["compactify"], FuzzConfig::default())?;
    for preset in ["Z", "Z2", "F2"] {
        let v = json(&["ba", "--preset", preset, "--depth", "3"])?;
        let comp = &v["report"]["compactification"];
        if comp["verified"] != true {
            return Err(format!("{preset}: not verified: {}", comp["checks"]));
        }
        for check in ["isomorphism", "closure_meets", "compact", "no_external_ends"] {
            if comp["checks"][check] != true {
                return Err(format!("{preset}: {check} failed"));
            }
        }
    }
    Ok(format!("{fuzz}; adapters Z, Z2, F2 at depth 3 verified"))
}

fn ground_truths() -> Check {
    let cases: [(&str, &str, &str, &[&str], &str); 4] = [
        (
            "Z",
            "40",
            "ray+",
            &["translations", "stars", "components", "cones"],
            "eigenset",
        ),
        (
            "Z",
            "40",
            "evens",
            &["translations", "stars", "components", "cones"],
            "not_eigenset",
        ),
        ("Z2", "30", "halfplane x>=0", &["translations"], "not_eigenset"),
        ("F2", "10", "branch a", &["translations", "cones"], "eigenset"),
    ];
    let mut n = 0;
    for (preset, r, set, families, expected) in cases {
        for family in families {
            let v = json(&[
                "eigenset", "check", "--preset", preset, "--R", r, "--slack", "2", "--family", family, "--set", set,
            ])?;
            if v["verdict"]["status"] != expected {
                return Err(format!(
                    "{preset} {set} under {family}: {} (want {expected})",
                    v["verdict"]["status"]
                ));
            }
            n += 1;
        }
    }
    Ok(format!("{n} verdicts as expected"))
}

fn determinism() -> Check {
    let runs: [&[&str]; 6] = [
        &["fuzz", "--n", "25", "--seed", "11"],
        &["fuzz", "--n", "10", "--seed", "11", "--format", "json"],
        &["ends", "tree", "--preset", "F2", "--R", "8", "--format", "dot"],
        &["ba", "--preset", "Z2", "--depth", "2", "--format", "json"],
        &["eigenset", "check", "--preset", "Z", "--set", "ray+", "--with", "evens"],
        &[
            "group",
            "check",
            "--preset",
            "F2",
            "--R",
            "8",
            "--test",
            "end-comparison",
            "--seed",
            "5",
        ],
    ];
    for args in runs {
        let first = endslab(args);
        let second = endslab(args);
        if first != second {
            return Err(format!("{args:?} differs between runs"));
        }
    }
    Ok(format!("{} commands repeated byte-identically", runs.len()))
}

fn main() -> ExitCode {
    let finite = || {
        let start = Instant::now();
        let out = suites(&["mod-equiv", "compactness-ends", "ends-oracle"], FuzzConfig::default())?;
        let covered = subfamily_coverage()?;
        let took = start.elapsed();
        if took >= Duration::from_secs(60) {
            return Err(format!("{out}; took {took:?}"));
        }
        Ok(format!(
            "{out} in {:.2}s; subfamily oracle decided {covered}/{DEFAULT_INSTANCES} fresh instances",
            took.as_secs_f64()
        ))
    };
    let criteria: [(&str, &dyn Fn() -> Check); 9] = [
        ("end counts of presets", &end_counts),
        ("refinement uniqueness", &|| {
            suites(&["refinement"], FuzzConfig::default())
        }),
        ("finite-algebra fuzz", &finite),
        ("compactification verification", &compactification),
        ("eigenset ground truths", &ground_truths),
        ("cone sandwich and family agreement", &|| {
            suites(&["cone-sandwich", "family-agreement"], FuzzConfig::default())
        }),
        ("star identity exactness", &|| {
            suites(&["star-identity"], FuzzConfig::default())
        }),
        ("eigenset algebra closure", &|| {
            suites(&["eigenset-closure"], FuzzConfig::default())
        }),
        ("determinism", &determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
