//! Command-line front end for `graph-schro`.
//!
//! Exit status: 0 on success, 1 when a verification fails, 2 on input errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graph_schro::Tolerances;

#[derive(Debug, Parser)]
#[command(name = "graph-schro", version, about = "Dimension, scattering and evolution tools for web-like graphs")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Relative tolerance for grouping eigenvalues.
    #[arg(long, global = true, default_value_t = Tolerances::default().group)]
    pub tol_group: f64,
    /// Relative singular-value threshold for kernels and ranks.
    #[arg(long, global = true, default_value_t = Tolerances::default().kernel)]
    pub tol_kernel: f64,
    /// Minimum distance of θ from the singular set.
    #[arg(long, global = true, default_value_t = Tolerances::default().singular_guard)]
    pub guard: f64,
    /// Seed for randomized campaigns.
    #[arg(long, global = true, default_value_t = graph_schro::verify::DEFAULT_SEED)]
    pub seed: u64,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Replace L by (L + Lᵀ)/2 instead of rejecting asymmetric input.
    #[arg(long, global = true)]
    pub symmetrize: bool,
}

impl GlobalArgs {
    pub fn tolerances(&self) -> Tolerances {
        Tolerances {
            group: self.tol_group,
            kernel: self.tol_kernel,
            singular_guard: self.guard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Continuous,
    Integer,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximal extension of a vertex set with clusters, branches and orders.
    Extend {
        input: PathBuf,
        /// Comma-separated seed vertices; overrides "B" in the input.
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<usize>>,
        /// Pick extension steps at random with this seed.
        #[arg(long)]
        order_seed: Option<u64>,
    },
    /// Bounds, exact and oracle dimensions of the solutions vanishing on a set.
    Dimension {
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        set: Option<Vec<usize>>,
    },
    /// Randomized sandwich and agreement campaign.
    Sweep {
        #[arg(long, default_value_t = 500)]
        count: usize,
        #[arg(long, value_enum, default_value_t = Family::Continuous)]
        family: Family,
    },
    /// T(θ), S(θ) and eigenfunction residuals at one θ.
    Scatter {
        input: PathBuf,
        /// Complex parameter, e.g. `0.3+0.8i`.
        #[arg(long, allow_hyphen_values = true)]
        theta: String,
        /// Channel depth of the eigenfunction residual check (default K0 + 7).
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Evolve "u0" from the input to time t.
    Evolve {
        input: PathBuf,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = graph_schro::evolution::DEFAULT_DEPTH)]
        depth: usize,
        /// Sites kept free of initial data at the end of each channel.
        #[arg(long, default_value_t = graph_schro::evolution::DEFAULT_GUARD)]
        support_guard: usize,
    },
    /// Decay-bound experiments: random webs, or a single web given as input.
    Experiment {
        input: Option<PathBuf>,
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Channel carrying the decaying data when an input is given.
        #[arg(long, default_value_t = 0)]
        channel: usize,
        #[arg(long, default_value_t = 1.0)]
        eps: f64,
        /// Constant C in the decay bound.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = graph_schro::evolution::DEFAULT_DEPTH)]
        depth: usize,
        #[arg(long, default_value_t = graph_schro::evolution::DEFAULT_GUARD)]
        support_guard: usize,
    },
    /// Run the acceptance checks.
    Verify {
        /// Run only these checks (comma-separated ids).
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<u8>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(commands::Status::Success) => ExitCode::SUCCESS,
        Ok(commands::Status::Failed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
