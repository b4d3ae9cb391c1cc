//! Command-line front end: one subcommand per experiment mode.
//!
//! Exit codes: 0 on success, 2 for configuration errors, 3 when a
//! refinement cap is hit or a solver does not terminate, 1 otherwise.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stadapt::harness::{emit_report, run_experiment, ExperimentConfig, Mode};
use stadapt::Error;

#[derive(Parser)]
#[command(name = "stadapt", version, about = "Adaptive time-space approximation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Moduli of smoothness over a sweep of u.
    Moduli(Common),
    /// Discrete Besov seminorm over a sweep of the dyadic depth.
    Besov(Common),
    /// Jackson construction on [0, L) over a sweep of L.
    Jackson(Common),
    /// Whitney ratio on [0, L) over a sweep of L.
    Whitney(Common),
    /// Time greedy over a sweep of delta.
    GreedyTime(Common),
    /// Spatial greedy over a sweep of delta.
    GreedySpace(Common),
    /// Fully discrete construction over a sweep of eps.
    GreedySt(Common),
    /// Rate fit of a table.
    Rates(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `out.dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed recorded in the report; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
}

impl Command {
    fn split(self) -> (Mode, Common) {
        match self {
            Command::Moduli(c) => (Mode::Moduli, c),
            Command::Besov(c) => (Mode::Besov, c),
            Command::Jackson(c) => (Mode::Jackson, c),
            Command::Whitney(c) => (Mode::Whitney, c),
            Command::GreedyTime(c) => (Mode::GreedyTime, c),
            Command::GreedySpace(c) => (Mode::GreedySpace, c),
            Command::GreedySt(c) => (Mode::GreedySt, c),
            Command::Rates(c) => (Mode::Rates, c),
        }
    }
}

fn run(mode: Mode, args: Common) -> Result<(), Error> {
    let mut cfg = ExperimentConfig::load(&args.config, Some(mode))?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let result = run_experiment(&cfg)?;
    for row in &result.rows {
        println!(
            "{mode} sweep={:.6e} cardinality={} error={:.6e} wall_ms={:.1}",
            row.sweep, row.cardinality, row.error, row.wall_ms
        );
    }
    if let Some(fit) = &result.fit {
        println!(
            "{mode} rate={:.4} intercept={:.4} residual={:.2e} window={}..{}",
            fit.rate, fit.intercept, fit.residual, fit.window.0, fit.window.1
        );
    }
    for path in emit_report(&result, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, args) = cli.command.split();
    match run(mode, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_config() {
                2
            } else if matches!(e, Error::CapReached { .. } | Error::SolverFailure(_)) {
                3
            } else {
                1
            };
            ExitCode::from(code)
        }
    }
}
