mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use regpred_core::bench::{GeneratorParams, Metric};
use regpred_core::Strategy;

/// Locate the commits that introduced failures in a branching history.
#[derive(Debug, Parser)]
#[command(name = "regpred", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Search a recorded graph with recorded verdicts.
    Run(RunArgs),
    /// Search a git repository, running a test command at each probed commit.
    GitRun(GitRunArgs),
    /// Search a recorded graph, asking for each verdict on the terminal.
    Interactive(InteractiveArgs),
    /// Run the algorithm matrix over many instances.
    Bench(BenchArgs),
    /// Write random instance bundles.
    Gen(GenArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Linear,
    Binary,
    #[value(alias = "mult")]
    Multiplying,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Linear => Strategy::Linear,
            StrategyArg::Binary => Strategy::Binary,
            StrategyArg::Multiplying => Strategy::Multiplying,
        }
    }
}

#[derive(Debug, Args)]
struct SearchOpts {
    /// Path search strategy.
    #[arg(long, value_enum, default_value = "multiplying")]
    strategy: StrategyArg,
    /// Hand each found regression point to every other leaf it explains
    /// (default with several leaves).
    #[arg(long, overrides_with = "no_propagate")]
    propagate: bool,
    /// Search every leaf on its own.
    #[arg(long)]
    no_propagate: bool,
}

impl SearchOpts {
    /// `None` means not given on the command line.
    fn propagate_flag(&self) -> Option<bool> {
        match (self.propagate, self.no_propagate) {
            (true, _) => Some(true),
            (_, true) => Some(false),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RunAlgorithm {
    Rpa,
    Bisect,
}

#[derive(Debug, Args)]
struct LeafOpts {
    /// File with one invalid leaf per line.
    #[arg(long, value_name = "FILE")]
    leaves: Option<PathBuf>,
    /// Invalid leaf id (repeatable).
    #[arg(long = "leaf", value_name = "ID")]
    leaf: Vec<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Graph file.
    graph: PathBuf,
    /// Label file with a verdict for every probed vertex.
    labels: PathBuf,
    #[command(flatten)]
    leaves: LeafOpts,
    #[command(flatten)]
    search: SearchOpts,
    #[arg(long, value_enum, default_value = "rpa")]
    algorithm: RunAlgorithm,
}

#[derive(Debug, Args)]
struct GitRunArgs {
    /// Repository to search.
    repo: PathBuf,
    /// Failing commit or ref (repeatable; default HEAD).
    #[arg(long = "leaf", value_name = "REF")]
    leaf: Vec<String>,
    #[command(flatten)]
    search: SearchOpts,
    /// Seconds before a single test run is abandoned.
    #[arg(long, default_value_t = 600, value_name = "SECS")]
    timeout: u64,
    /// Take the root as passing and the leaves as failing without running
    /// the test there.
    #[arg(long)]
    trust_endpoints: bool,
    /// Discard local changes when checking out commits.
    #[arg(long)]
    force: bool,
    /// Test command: exit 0 passes, 1-127 fails, 125 aborts the search.
    #[arg(last = true, required = true, value_name = "COMMAND")]
    test: Vec<String>,
}

#[derive(Debug, Args)]
struct InteractiveArgs {
    /// Graph file.
    graph: PathBuf,
    /// Invalid leaf ids.
    #[arg(value_name = "LEAF")]
    leaf_ids: Vec<String>,
    /// File with one invalid leaf per line.
    #[arg(long, value_name = "FILE")]
    leaves: Option<PathBuf>,
    #[command(flatten)]
    search: SearchOpts,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Directory of recorded bundles (`<name>.graph`, `.labels`, `.leaves`).
    #[arg(long, value_name = "DIR")]
    instances: Option<PathBuf>,
    /// Generate instances, e.g. `n=100,branch=0.1,merge=0.1,regressions=3,repair=0.2`.
    #[arg(long, value_name = "PARAMS", requires = "seeds")]
    random: Option<GeneratorParams>,
    /// Seed range for --random, e.g. `1..50` (inclusive).
    #[arg(long, value_name = "A..B")]
    seeds: Option<commands::Seeds>,
    /// Comma-separated algorithm ids (default: all).
    #[arg(long, value_name = "LIST")]
    algorithms: Option<String>,
    /// Result CSV path; `-` writes to stdout.
    #[arg(long, default_value = "-", value_name = "FILE")]
    out: PathBuf,
    /// Also write one row per leaf, not just the per-instance totals.
    #[arg(long)]
    per_leaf: bool,
    /// Write cumulative tables for this metric, one file per algorithm.
    #[arg(long, value_name = "METRIC", requires = "cumulative_dir")]
    cumulative: Option<Metric>,
    /// Directory for the cumulative tables.
    #[arg(long, value_name = "DIR")]
    cumulative_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Generator parameters, as for `bench --random`.
    #[arg(long, default_value = "", value_name = "PARAMS")]
    params: GeneratorParams,
    /// Seed or inclusive seed range.
    #[arg(long, default_value = "0", value_name = "A..B")]
    seeds: commands::Seeds,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => commands::run(args),
        Command::GitRun(args) => commands::git_run(args),
        Command::Interactive(args) => commands::interactive(args),
        Command::Bench(args) => commands::bench(args),
        Command::Gen(args) => commands::gen(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("regpred: {e}");
            ExitCode::from(e.code())
        }
    }
}
