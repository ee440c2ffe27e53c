//! `consensus run`: execute a batch of experiments from a config file.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;

use consensus_core::analysis::detect_consensus;
use consensus_core::engine::{run_batch_opts, ExecOptions};
use consensus_core::io::{write_convergence_csv, write_records_jsonl};
use consensus_llm::ConversationalFactory;

use crate::config_file::{load_json, RunFile, RunOverrides};
use crate::manifest::RunManifest;
use crate::output::{fail_run, prepare_output_dir};

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to the experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory the outputs are written to.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the number of experiments (n_e).
    #[arg(long)]
    pub experiments: Option<usize>,
    /// Override the number of agents (n_a).
    #[arg(long)]
    pub agents: Option<usize>,
    /// Override the number of rounds (n_r).
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Override the run seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Consensus spread threshold used for summary.csv.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Experiments evaluated in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

pub fn execute(args: &RunArgs) -> Result<()> {
    match load_json::<RunFile>(&args.config)? {
        RunFile::Sweep(sweep) => {
            // A sweep-shaped config is accepted here too; same outputs as the
            // sweep subcommand.
            let sweep_args = super::sweep::SweepArgs {
                config: args.config.clone(),
                out: args.out.clone(),
                seed: args.seed,
                eps: args.eps,
                jobs: args.jobs,
            };
            super::sweep::execute_resolved(&sweep_args, sweep)
        }
        RunFile::Single(single) => {
            let overrides = RunOverrides {
                experiments: args.experiments,
                agents: args.agents,
                rounds: args.rounds,
                seed: args.seed,
            };
            let config = single.resolve(&overrides)?;
            prepare_output_dir(&args.out)?;

            let mut manifest = RunManifest::new(
                "run",
                &args.config,
                &args.out,
                serde_json::json!({
                    "experiments": config.experiments,
                    "agents": config.agent_count(),
                    "rounds": config.rounds,
                    "eps": args.eps,
                    "jobs": args.jobs,
                }),
                config.seed,
            );
            manifest.write(&args.out)?;

            let factory = ConversationalFactory::new(config.dimension);
            let opts = ExecOptions {
                batch_jobs: args.jobs,
                round_jobs: 1,
            };
            let records = match run_batch_opts(&config, &factory, &opts) {
                Ok(records) => records,
                Err(e) => return fail_run(&mut manifest, &args.out, &["records.jsonl"], e.into()),
            };

            let records_path = args.out.join("records.jsonl");
            let writer = BufWriter::new(File::create(&records_path)?);
            write_records_jsonl(writer, &records).context("write records.jsonl")?;

            let reports: Vec<_> = records
                .iter()
                .map(|r| detect_consensus(r, args.eps).map(|report| (r.experiment, report)))
                .collect::<Result<_, _>>()?;
            let summary = BufWriter::new(File::create(args.out.join("summary.csv"))?);
            write_convergence_csv(summary, &reports, config.dimension)
                .context("write summary.csv")?;

            manifest.status = "complete".into();
            manifest.experiments = Some(records.len());
            manifest.fallback_decisions = Some(records.iter().map(|r| r.fallback_count()).sum());
            manifest.write(&args.out)?;

            println!(
                "run complete: {} experiments, records in {}",
                records.len(),
                records_path.display()
            );
            Ok(())
        }
    }
}
