use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lll_core::{ConditionKind, SelectionPolicy};

#[derive(Debug, Parser)]
#[command(
    name = "lll",
    version,
    about = "Moser-Tardos resampling and cluster-expansion condition checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a local lemma condition; exit 0 if it holds, 2 if not.
    Check(CheckArgs),
    /// Run the resampling algorithm once; exit 3 if it hits the step budget.
    Solve(SolveArgs),
    /// Run many seeded trials and compare resample counts with mu.
    Experiment(ExperimentArgs),
    /// Compare branching-process tree frequencies with their closed forms.
    Branching(BranchingArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Dimacs,
    Hypergraph,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Bundled {
    #[value(name = "random-3sat")]
    Random3Sat,
    #[value(name = "hypergraph-60")]
    Hypergraph60,
    #[value(name = "five-cycle")]
    FiveCycle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ProcessArg {
    #[value(name = "moser-tardos", alias = "mt")]
    MoserTardos,
    Improved,
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Instance file.
    #[arg(long, conflicts_with = "bundled")]
    pub instance: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Dimacs)]
    pub format: Format,
    /// Colors per vertex for hypergraph instances.
    #[arg(long, default_value_t = 2)]
    pub colors: usize,
    /// Use an instance shipped with the library instead of a file.
    #[arg(long, value_enum)]
    pub bundled: Option<Bundled>,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, value_parser = parse_condition, default_value = "cluster")]
    pub condition: ConditionKind,
    /// `uniform` (search for the smallest uniform value), a number, or a
    /// file with one value per event.
    #[arg(long, conflicts_with = "x")]
    pub mu: Option<String>,
    /// File with one x value per event; mu = x / (1 - x).
    #[arg(long)]
    pub x: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Report path; without it the report goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutFormat::Json)]
    pub out_format: OutFormat,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to max(10^6, 100 * ceil(sum mu)).
    #[arg(long)]
    pub max_steps: Option<u64>,
    #[arg(long, value_parser = parse_policy, default_value = "lowest-id")]
    pub policy: SelectionPolicy,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Only used to size the default step budget.
    #[arg(long)]
    pub mu: Option<String>,
    #[command(flatten)]
    pub run: RunArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Run even when the condition fails; bound columns become null.
    #[arg(long)]
    pub force: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BranchingArgs {
    /// Named test graph: isolated, edge, path3, triangle, cycle5.
    #[arg(long, conflicts_with_all = ["instance", "bundled"])]
    pub graph: Option<String>,
    #[command(flatten)]
    pub instance: InstanceArgs,
    #[arg(long, value_enum, default_value_t = ProcessArg::Improved)]
    pub process: ProcessArg,
    /// A number, a file, or `uniform` (instances only). Defaults to 1.
    #[arg(long, conflicts_with = "x")]
    pub mu: Option<String>,
    #[arg(long)]
    pub x: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub root: usize,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(1..=12))]
    pub max_nodes: u64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_condition(s: &str) -> Result<ConditionKind, String> {
    s.parse().map_err(|e: lll_core::Error| e.to_string())
}

fn parse_policy(s: &str) -> Result<SelectionPolicy, String> {
    s.parse().map_err(|e: lll_core::Error| e.to_string())
}
