//! `uac`: decide, construct, verify and simulate avoidance couplings.

mod commands;
mod construct;
mod source;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "uac", version, about = "Uniform avoidance couplings of simple random walks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GraphArgs {
    /// Edge-list graph file.
    #[arg(long, value_name = "FILE", conflicts_with = "builder")]
    pub graph: Option<PathBuf>,
    /// Built-in graph family and its integer parameters, e.g. `--builder cycle 9`.
    #[arg(long, value_name = "NAME [PARAMS]", num_args = 1..)]
    pub builder: Option<Vec<String>>,
}

#[derive(Args, Debug, Clone)]
pub struct DecideArgs {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct ConstructArgs {
    /// Construction name followed by its parameters.
    pub construction: String,
    pub params: Vec<String>,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Start state for constructions that take one.
    #[arg(long, num_args = 2, value_names = ["X", "Y"])]
    pub start: Option<Vec<usize>>,
    /// Kernel file path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Kernel file to verify.
    #[arg(long)]
    pub kernel: PathBuf,
    /// Graph the kernel lives on; defaults to the graph embedded in the kernel file.
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Count uniformity failures toward the exit code.
    #[arg(long)]
    pub require_uniform: bool,
    /// Run the belief-filter faithfulness check on both tokens.
    #[arg(long)]
    pub filter: bool,
    #[arg(long, default_value_t = 10_000)]
    pub belief_cap: usize,
    /// Run the Monte Carlo frequency tests (needs --seed).
    #[arg(long)]
    pub monte_carlo: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: usize,
    /// Longest history window tested; every window from 1 up is run.
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long, default_value_t = uac_core::verifier::DEFAULT_ALPHA)]
    pub alpha: f64,
    #[arg(long, default_value_t = uac_core::verifier::DEFAULT_MIN_COUNT)]
    pub min_count: u64,
    /// Independent Monte Carlo workers; the step budget is split between them.
    #[arg(long, default_value_t = 4)]
    pub workers: usize,
    /// Report path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[arg(long)]
    pub kernel: PathBuf,
    #[command(flatten)]
    pub graph: GraphArgs,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub seed: u64,
    /// Trajectory file, one "x y" line per visited state.
    #[arg(long)]
    pub out: PathBuf,
    /// Summary report path; stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a graph admits a uniform avoidance coupling.
    Decide(DecideArgs),
    /// Build a named coupling and write it as a kernel file.
    Construct(ConstructArgs),
    /// Check a kernel file exactly and, optionally, statistically.
    Verify(VerifyArgs),
    /// Sample a trajectory from a kernel file.
    Simulate(SimulateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Decide(a) => commands::decide(&a),
        Command::Construct(a) => commands::construct(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Simulate(a) => commands::simulate(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
