//! `distacc`: validate plants, synthesize controllers, evaluate costs and
//! competitive ratios, and run family sweeps.
//!
//! Machine-readable output goes to stdout (or `--out`); human-readable
//! summaries go to stderr. Exit codes: 0 success, 1 domain failure,
//! 2 I/O or parse failure, 3 numerical non-convergence.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use distacc::evaluation::{CostOptions, Family, MethodChoice};
use distacc::{DareOptions, StrategyKind};

#[derive(Debug, Parser)]
#[command(name = "distacc", version, about = "Limited-model-information controller design and evaluation")]
struct Cli {
    #[command(flatten)]
    tol: Tolerances,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Tolerances {
    /// Riccati stopping tolerance (relative step size).
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol_dare: f64,
    /// Riccati iteration limit.
    #[arg(long, global = true, default_value_t = 100_000)]
    dare_max_iter: usize,
    /// Simulated-cost stopping tolerance (relative stage cost).
    #[arg(long, global = true, default_value_t = 1e-15)]
    tol_cost: f64,
    /// Partial-sum cap beyond which a simulated cost counts as divergent.
    #[arg(long, global = true, default_value_t = 1e18)]
    cap: f64,
    /// Longest simulation before a cost counts as divergent.
    #[arg(long, global = true, default_value_t = 1_000_000)]
    horizon_max: usize,
}

impl Tolerances {
    fn cost_options(&self) -> CostOptions {
        CostOptions {
            rel_tol: self.tol_cost,
            cap: self.cap,
            horizon_max: self.horizon_max,
            dare: DareOptions {
                tol: self.tol_dare,
                max_iter: self.dare_max_iter,
            },
            ..CostOptions::default()
        }
    }
}

#[derive(Debug, Args)]
struct PlantArgs {
    /// Plant JSON file.
    plant: PathBuf,
    /// Plant graph JSON file (`{"n", "adjacency"}`); defaults to the sparsity of A.
    #[arg(long)]
    graph: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check B against epsilon and A against the plant graph.
    Validate {
        #[command(flatten)]
        plant: PlantArgs,
    },
    /// Build a controller and write it as JSON.
    Synthesize {
        #[command(flatten)]
        plant: PlantArgs,
        #[arg(long, value_parser = parse_strategy)]
        strategy: StrategyKind,
        /// Controller output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the PI gains (`Kp`, `Ki`) here. Only with `--strategy pi`.
        #[arg(long)]
        gains_out: Option<PathBuf>,
    },
    /// Closed-loop cost of a strategy, as JSON.
    Cost {
        #[command(flatten)]
        plant: PlantArgs,
        #[arg(long, value_parser = parse_strategy)]
        strategy: StrategyKind,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Cost ratio of a strategy against the optimal centralized controller, as JSON.
    Ratio {
        #[command(flatten)]
        plant: PlantArgs,
        #[arg(long, value_parser = parse_strategy)]
        strategy: StrategyKind,
    },
    /// Simulate a plant under a controller file and write the trajectory CSV.
    Simulate {
        /// Plant JSON file.
        plant: PathBuf,
        #[arg(long)]
        controller: PathBuf,
        #[arg(long, default_value_t = 50)]
        horizon: usize,
        /// CSV output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a plant family over a parameter grid.
    Sweep {
        #[arg(long, value_parser = parse_family)]
        family: Family,
        #[arg(long)]
        eps: f64,
        /// Comma-separated values of r, or r:s pairs for the path family.
        #[arg(long)]
        grid: String,
        /// Comma-separated strategies.
        #[arg(long, default_value = "deadbeat")]
        strategy: String,
        /// CSV output file; stdout if absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the rows as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Worker threads; all cores if absent.
        #[arg(long)]
        jobs: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Closed,
    Simulated,
}

impl From<Method> for MethodChoice {
    fn from(m: Method) -> Self {
        match m {
            Method::Auto => MethodChoice::Auto,
            Method::Closed => MethodChoice::ClosedForm,
            Method::Simulated => MethodChoice::Simulated,
        }
    }
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    s.parse().map_err(|e: distacc::Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: distacc::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = cli.tol.cost_options();
    let outcome = match cli.command {
        Command::Validate { plant } => commands::validate(&plant.plant, plant.graph.as_deref()),
        Command::Synthesize {
            plant,
            strategy,
            out,
            gains_out,
        } => commands::synthesize(
            &plant.plant,
            plant.graph.as_deref(),
            strategy,
            out.as_deref(),
            gains_out.as_deref(),
            &opts,
        ),
        Command::Cost { plant, strategy, method } => {
            commands::cost(&plant.plant, plant.graph.as_deref(), strategy, method.into(), &opts)
        }
        Command::Ratio { plant, strategy } => commands::ratio(&plant.plant, plant.graph.as_deref(), strategy, &opts),
        Command::Simulate {
            plant,
            controller,
            horizon,
            out,
        } => commands::simulate(&plant, &controller, horizon, out.as_deref()),
        Command::Sweep {
            family,
            eps,
            grid,
            strategy,
            out,
            json,
            jobs,
        } => commands::sweep(
            family,
            eps,
            &grid,
            &strategy,
            out.as_deref(),
            json.as_deref(),
            jobs,
            &opts,
        ),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
