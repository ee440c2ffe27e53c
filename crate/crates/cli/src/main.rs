//! Operator entry point for the consensus simulation toolkit.

mod commands;
mod config_file;
mod manifest;
mod output;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "consensus",
    version,
    about = "Multi-agent consensus seeking: experiment batches, robot aggregation, and record analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch of negotiation experiments from a config file.
    Run(commands::run::RunArgs),
    /// Simulate planar robot aggregation with a planner/controller split.
    Robots(commands::robots::RobotsArgs),
    /// Compute convergence, cluster, and oscillation reports from records.
    Analyze(commands::analyze::AnalyzeArgs),
    /// Run a grouped Monte Carlo sweep and summarize per group.
    Sweep(commands::sweep::SweepArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => commands::run::execute(args),
        Command::Robots(args) => commands::robots::execute(args),
        Command::Analyze(args) => commands::analyze::execute(args),
        Command::Sweep(args) => commands::sweep::execute(args),
    };
    if let Err(error) = result {
        eprintln!("error: {error:#}");
        std::process::exit(1);
    }
}
