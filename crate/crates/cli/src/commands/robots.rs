//! `consensus robots`: the planar aggregation simulation.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use consensus_core::aggregation::run_aggregation;
use consensus_core::io::{write_trajectory_points_csv, write_trajectory_points_jsonl};
use consensus_core::Dimension;
use consensus_llm::ConversationalFactory;

use crate::config_file::{load_json, PlannerChoice, RobotsFile};
use crate::manifest::RunManifest;
use crate::output::{fail_run, prepare_output_dir};

#[derive(Debug, Args)]
pub struct RobotsArgs {
    /// Path to the robots config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory the outputs are written to.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the run seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the planner backend.
    #[arg(long, value_enum)]
    pub planner: Option<PlannerChoice>,
    /// Chat endpoint URL for --planner llm (mock://average for the built-in
    /// offline endpoint).
    #[arg(long)]
    pub endpoint: Option<String>,
}

pub fn execute(args: &RobotsArgs) -> Result<()> {
    let file: RobotsFile = load_json(&args.config)?;
    let config = file.resolve(args.seed, args.planner, args.endpoint.as_deref())?;
    prepare_output_dir(&args.out)?;

    let mut manifest = RunManifest::new(
        "robots",
        &args.config,
        &args.out,
        serde_json::json!({
            "robots": config.robots,
            "planner_period": config.timing.planner_period,
            "controller_period": config.timing.controller_period,
            "t_end": config.timing.t_end,
            "k_p": config.k_p,
            "v_max": config.v_max,
        }),
        config.seed,
    );
    manifest.write(&args.out)?;

    let factory = ConversationalFactory::new(Dimension::Two);
    let log = match run_aggregation(&config, &factory) {
        Ok(log) => log,
        Err(e) => {
            return fail_run(
                &mut manifest,
                &args.out,
                &["trajectory.csv", "trajectory.jsonl"],
                e.into(),
            )
        }
    };

    let csv = BufWriter::new(File::create(args.out.join("trajectory.csv"))?);
    write_trajectory_points_csv(csv, &log).context("write trajectory.csv")?;
    let jsonl = BufWriter::new(File::create(args.out.join("trajectory.jsonl"))?);
    write_trajectory_points_jsonl(jsonl, &log).context("write trajectory.jsonl")?;

    manifest.status = "complete".into();
    manifest.write(&args.out)?;

    println!(
        "robots complete: {} robots, {} samples",
        config.robots,
        log.len() / config.robots.max(1)
    );
    Ok(())
}
