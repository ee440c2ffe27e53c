//! `consensus analyze`: post-hoc reports over a records.jsonl file.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use serde::Serialize;

use consensus_core::analysis::{
    detect_clusters, detect_consensus, detect_oscillation, ClusterReport, ConvergenceReport,
    OscillationReport,
};
use consensus_core::engine::ExperimentRecord;
use consensus_core::io::{read_records_jsonl, write_convergence_csv, write_trajectories_csv};
use consensus_core::Dimension;

use crate::output::prepare_output_dir;

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Path to a records.jsonl produced by `run` or `sweep`.
    #[arg(long)]
    pub records: PathBuf,
    /// Directory the reports are written to.
    #[arg(long)]
    pub out: PathBuf,
    /// Consensus spread threshold.
    #[arg(long, default_value_t = 1e-6)]
    pub eps: f64,
    /// Minimum separation between clusters.
    #[arg(long, default_value_t = 5.0)]
    pub gap: f64,
    /// Trailing rounds inspected for oscillation.
    #[arg(long, default_value_t = 6)]
    pub window: usize,
    /// Equality tolerance for oscillation detection (0 = exact).
    #[arg(long, default_value_t = 0.0)]
    pub osc_tol: f64,
}

#[derive(Serialize)]
struct PerExperiment<T> {
    experiment: usize,
    #[serde(flatten)]
    report: T,
}

fn write_json<T: Serialize>(path: &std::path::Path, value: &T) -> Result<()> {
    let mut writer = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut writer, value)?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn execute(args: &AnalyzeArgs) -> Result<()> {
    let reader = BufReader::new(
        File::open(&args.records)
            .with_context(|| format!("cannot open {}", args.records.display()))?,
    );
    let records: Vec<ExperimentRecord<f64>> = read_records_jsonl(reader)
        .with_context(|| format!("cannot parse {}", args.records.display()))?;
    prepare_output_dir(&args.out)?;

    if records.is_empty() {
        println!("no records in {}", args.records.display());
        let summary = BufWriter::new(File::create(args.out.join("summary.csv"))?);
        write_convergence_csv::<f64, _>(summary, &[], Dimension::One)?;
        write_json(
            &args.out.join("clusters.json"),
            &Vec::<PerExperiment<ClusterReport<f64>>>::new(),
        )?;
        write_json(
            &args.out.join("oscillations.json"),
            &Vec::<PerExperiment<OscillationReport>>::new(),
        )?;
        let trajectories = BufWriter::new(File::create(args.out.join("trajectories.csv"))?);
        write_trajectories_csv::<f64, _>(trajectories, &[])?;
        return Ok(());
    }

    let dimension = records[0]
        .initial_states
        .first()
        .map(|s| s.dimension())
        .unwrap_or(Dimension::One);
    if records
        .iter()
        .flat_map(|r| r.initial_states.iter())
        .any(|s| s.dimension() != dimension)
    {
        bail!("records mix 1-D and 2-D states; analyze them separately");
    }

    let mut convergence: Vec<(usize, ConvergenceReport<f64>)> = Vec::new();
    let mut clusters: Vec<PerExperiment<ClusterReport<f64>>> = Vec::new();
    let mut oscillations: Vec<PerExperiment<OscillationReport>> = Vec::new();
    for record in &records {
        convergence.push((record.experiment, detect_consensus(record, args.eps)?));
        clusters.push(PerExperiment {
            experiment: record.experiment,
            report: detect_clusters(&record.final_states, args.eps, args.gap)?,
        });
        oscillations.push(PerExperiment {
            experiment: record.experiment,
            report: detect_oscillation(record, args.window, args.osc_tol)?,
        });
    }

    let summary = BufWriter::new(File::create(args.out.join("summary.csv"))?);
    write_convergence_csv(summary, &convergence, dimension).context("write summary.csv")?;
    write_json(&args.out.join("clusters.json"), &clusters)?;
    write_json(&args.out.join("oscillations.json"), &oscillations)?;
    let trajectories = BufWriter::new(File::create(args.out.join("trajectories.csv"))?);
    write_trajectories_csv(trajectories, &records).context("write trajectories.csv")?;

    println!(
        "analyzed {} records: {} converged",
        records.len(),
        convergence.iter().filter(|(_, r)| r.consensus).count()
    );
    Ok(())
}
