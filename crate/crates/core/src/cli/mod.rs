//! Command-line front end. Every command renders into a buffer so the
//! binary and the tests see the same bytes.

mod commands;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;

pub use commands::default_radius;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "endslab",
    version,
    about = "Ends of graphs, groups and finite scaled Boolean algebras"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalOpts {
    /// Horizon radius; defaults depend on the preset (Z 40, Z2 30, F2 10)
    #[arg(long = "R", global = true, value_parser = clap::value_parser!(u32).range(1..))]
    pub radius: Option<u32>,
    /// Width of the outer shell that marks a component as unbounded
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub shell: u32,
    /// Verdict slack for eigenset checks
    #[arg(long, global = true, default_value_t = 2)]
    pub slack: u32,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// End counts and end trees of a preset or graph file
    Ends {
        #[command(subcommand)]
        command: EndsCommand,
    },
    /// Ends, compactness and compactification of a finite scaled algebra
    Ba(BaArgs),
    /// Eigenset verdicts
    Eigenset {
        #[command(subcommand)]
        command: EigensetCommand,
    },
    /// Checks on scaled groups and their actions
    Group {
        #[command(subcommand)]
        command: GroupCommand,
    },
    /// Randomized property suites
    Fuzz(FuzzArgs),
}

#[derive(Args, Debug, Clone)]
pub struct SpaceArgs {
    /// Group preset (Z, Z2, Z^3, F2, F3)
    #[arg(long, conflicts_with = "graph")]
    pub preset: Option<String>,
    /// Edge-list graph file
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Comma-separated level radii; defaults to 1..=L for the preset's L
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<u32>>,
    /// Number of levels when no radii are given
    #[arg(long)]
    pub levels: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum EndsCommand {
    /// Unbounded component counts per level and the end-count verdict
    Count(SpaceArgs),
    /// Tree of nested unbounded components
    Tree(SpaceArgs),
}

#[derive(Args, Debug)]
pub struct BaArgs {
    /// Scaled-space file
    pub file: Option<PathBuf>,
    /// Build the algebra of a preset at a working depth instead
    #[arg(long, conflicts_with = "file")]
    pub preset: Option<String>,
    /// Level of the decomposition used as working depth
    #[arg(long, requires = "preset")]
    pub depth: Option<usize>,
    /// Also check that added points only lie in elements meeting the original universe
    #[arg(long)]
    pub condition2: bool,
}

#[derive(Subcommand, Debug)]
pub enum EigensetCommand {
    /// Judge one set under one operator family
    Check(EigensetArgs),
    /// List the operator families
    Families,
}

#[derive(Args, Debug)]
pub struct EigensetArgs {
    #[command(flatten)]
    pub space: SpaceArgs,
    /// translations, stars, components, cones, cones-cb, cones-bc, cones-g, gromov
    #[arg(long, default_value = "translations")]
    pub family: String,
    /// Set expression: empty, all, ray+, ray-, evens, odds, `halfplane x>=0`,
    /// `ball 3`, `sphere 3`, `component L I`, `branch a` or a vertex-list file
    #[arg(long)]
    pub set: String,
    /// Second set for the closure check
    #[arg(long)]
    pub with: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupTest {
    StarIdentity,
    Duality,
    Action,
    Covers,
    SameEigensets,
    EndComparison,
    Scale,
    Subgroup,
    LocallyBounded,
    BoundedGeometry,
}

#[derive(Subcommand, Debug)]
pub enum GroupCommand {
    /// Run one check
    Check(GroupArgs),
    /// List the built-in actions
    Actions,
}

#[derive(Args, Debug)]
pub struct GroupArgs {
    #[arg(long, default_value = "Z")]
    pub preset: String,
    #[arg(long, value_enum)]
    pub test: GroupTest,
    /// Set expression for A
    #[arg(long)]
    pub set: Option<String>,
    /// Words of B separated by commas (`e,a,A`); defaults to ball(1)
    #[arg(long, value_delimiter = ',')]
    pub b: Option<Vec<String>>,
    /// Built-in action, or custom:<name>
    #[arg(long, conflicts_with = "action_file")]
    pub action: Option<String>,
    #[arg(long)]
    pub action_file: Option<PathBuf>,
    /// Subgroup generators for `--test subgroup`, comma separated
    #[arg(long, value_delimiter = ',')]
    pub gens: Option<Vec<String>>,
    /// Level used by `--test end-comparison`
    #[arg(long, default_value_t = 2)]
    pub level: usize,
}

#[derive(Args, Debug)]
pub struct FuzzArgs {
    /// Suites to run; all when absent
    #[arg(long = "suite")]
    pub suites: Vec<String>,
    /// Instances per suite, overriding each suite's default
    #[arg(long = "n")]
    pub instances: Option<usize>,
    /// Presets for the suites on groups; Z, Z2 and F2 when absent
    #[arg(long = "preset")]
    pub presets: Vec<String>,
    /// List the suites and exit
    #[arg(long)]
    pub list: bool,
}

/// Rendered output of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn usage(msg: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        }
    }
}

/// Command errors that report a failed property rather than bad input.
fn is_property_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::OracleFailure { .. } | Error::Verification(_) | Error::NotClosed | Error::Internal(_)
    )
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return Outcome {
                    code: EXIT_OK,
                    stdout: e.render().to_string(),
                    stderr: String::new(),
                };
            }
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return Outcome::usage(first.trim_start_matches("error: "));
        }
    };
    match commands::dispatch(&cli) {
        Ok((code, stdout)) => Outcome {
            code,
            stdout,
            stderr: String::new(),
        },
        Err(e) if is_property_failure(&e) => Outcome {
            code: EXIT_FAILURE,
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
        Err(e) => Outcome::usage(e.to_string().lines().next().unwrap_or_default()),
    }
}
