//! `consensus sweep`: grouped Monte Carlo runs over agent counts and noise
//! profiles, summarized per group.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde::Serialize;

use consensus_core::analysis::summarize;
use consensus_core::engine::{run_batch_opts, ExecOptions, ExperimentRecord};
use consensus_core::io::{write_records_jsonl, write_summary_csv};
use consensus_core::StrategyOnlyFactory;

use crate::config_file::{load_json, SweepFile};
use crate::manifest::RunManifest;
use crate::output::{fail_run, prepare_output_dir};

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Path to the sweep config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Directory the outputs are written to.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the sweep seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Consensus spread threshold for the per-group statistics.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Experiments evaluated in parallel within each group.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Serialize)]
struct GroupEntry {
    group: usize,
    agents: usize,
    profile: String,
    sigma: f64,
    trials: usize,
    seed: u64,
    config_fingerprint: String,
    /// Range of lines in records.jsonl belonging to this group.
    record_start: usize,
    record_end: usize,
}

pub fn execute(args: &SweepArgs) -> Result<()> {
    let file: SweepFile = load_json(&args.config)?;
    execute_resolved(args, file)
}

pub fn execute_resolved(args: &SweepArgs, file: SweepFile) -> Result<()> {
    let groups = file.resolve(args.seed)?;
    prepare_output_dir(&args.out)?;

    let resolved_seed = args.seed.unwrap_or(file.seed);
    let mut manifest = RunManifest::new(
        "sweep",
        &args.config,
        &args.out,
        serde_json::json!({
            "groups": groups.len(),
            "trials": file.sweep.trials,
            "eps": args.eps,
            "jobs": args.jobs,
        }),
        resolved_seed,
    );
    manifest.write(&args.out)?;

    let opts = ExecOptions {
        batch_jobs: args.jobs,
        round_jobs: 1,
    };
    let mut all_records: Vec<ExperimentRecord<f64>> = Vec::new();
    let mut entries = Vec::new();
    let mut grouped: Vec<(usize, String, Vec<ExperimentRecord<f64>>)> = Vec::new();
    for (index, group) in groups.iter().enumerate() {
        let records = match run_batch_opts(&group.config, &StrategyOnlyFactory, &opts) {
            Ok(records) => records,
            Err(e) => {
                return fail_run(
                    &mut manifest,
                    &args.out,
                    &[
                        "records.jsonl",
                        "groups.json",
                        "summary.csv",
                        "summary.json",
                    ],
                    e.into(),
                )
            }
        };
        entries.push(GroupEntry {
            group: index,
            agents: group.agents,
            profile: group.label.clone(),
            sigma: group.sigma,
            trials: records.len(),
            seed: group.config.seed,
            config_fingerprint: group.config.fingerprint(),
            record_start: all_records.len(),
            record_end: all_records.len() + records.len(),
        });
        grouped.push((group.agents, group.label.clone(), records.clone()));
        all_records.extend(records);
    }

    let writer = BufWriter::new(File::create(args.out.join("records.jsonl"))?);
    write_records_jsonl(writer, &all_records).context("write records.jsonl")?;

    let mut groups_file = BufWriter::new(File::create(args.out.join("groups.json"))?);
    serde_json::to_writer_pretty(&mut groups_file, &entries)?;
    groups_file.write_all(b"\n")?;

    let summaries = summarize(&grouped, args.eps)?;
    let summary_csv = BufWriter::new(File::create(args.out.join("summary.csv"))?);
    write_summary_csv(summary_csv, &summaries).context("write summary.csv")?;
    let mut summary_json = BufWriter::new(File::create(args.out.join("summary.json"))?);
    serde_json::to_writer_pretty(&mut summary_json, &summaries)?;
    summary_json.write_all(b"\n")?;

    manifest.status = "complete".into();
    manifest.experiments = Some(all_records.len());
    manifest.fallback_decisions = Some(all_records.iter().map(|r| r.fallback_count()).sum());
    manifest.write(&args.out)?;

    println!(
        "sweep complete: {} groups, {} experiments",
        entries.len(),
        all_records.len()
    );
    Ok(())
}
