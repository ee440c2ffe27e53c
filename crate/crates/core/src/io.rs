//! Reading and writing experiment artifacts: JSON Lines records, summary CSV
//! tables, and trajectory exports for external plotting.

use std::io::{BufRead, Write};

use thiserror::Error;

use crate::aggregation::TrajectoryPoint;
use crate::analysis::{ConvergenceReport, MonteCarloSummary};
use crate::engine::{ExperimentRecord, SCHEMA_VERSION};
use crate::scalar::Scalar;
use crate::state::{Dimension, State};

#[derive(Debug, Error)]
pub enum RecordIoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        source: serde_json::Error,
    },
    #[error("line {line}: record schema {found} is not supported (expected {expected})")]
    SchemaVersion {
        line: usize,
        found: u32,
        expected: u32,
    },
}

/// Write one JSON document per record, newline separated.
pub fn write_records_jsonl<S: Scalar, W: Write>(
    mut writer: W,
    records: &[ExperimentRecord<S>],
) -> Result<(), RecordIoError> {
    for record in records {
        serde_json::to_writer(&mut writer, record)
            .map_err(|source| RecordIoError::Json { line: 0, source })?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

pub fn records_to_jsonl_string<S: Scalar>(
    records: &[ExperimentRecord<S>],
) -> Result<String, RecordIoError> {
    let mut buffer = Vec::new();
    write_records_jsonl(&mut buffer, records)?;
    Ok(String::from_utf8(buffer).expect("json is utf-8"))
}

/// Read records back, skipping blank lines and rejecting unknown schemas.
pub fn read_records_jsonl<S: Scalar, R: BufRead>(
    reader: R,
) -> Result<Vec<ExperimentRecord<S>>, RecordIoError> {
    let mut records = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line_no = index + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ExperimentRecord<S> =
            serde_json::from_str(&line).map_err(|source| RecordIoError::Json {
                line: line_no,
                source,
            })?;
        if record.schema != SCHEMA_VERSION {
            return Err(RecordIoError::SchemaVersion {
                line: line_no,
                found: record.schema,
                expected: SCHEMA_VERSION,
            });
        }
        records.push(record);
    }
    Ok(records)
}

fn state_columns(prefix: &str, dim: Dimension) -> String {
    match dim {
        Dimension::One => prefix.to_string(),
        Dimension::Two => format!("{prefix}_x,{prefix}_y"),
    }
}

fn state_cells<S: Scalar>(state: &State<S>) -> String {
    state
        .components()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// One convergence row per experiment.
pub fn write_convergence_csv<S: Scalar, W: Write>(
    mut writer: W,
    reports: &[(usize, ConvergenceReport<S>)],
    dim: Dimension,
) -> Result<(), RecordIoError> {
    writeln!(
        writer,
        "experiment,consensus,{},convergence_round,final_spread,{}",
        state_columns("consensus_value", dim),
        state_columns("bias", dim)
    )?;
    for (experiment, report) in reports {
        let round = report
            .convergence_round
            .map(|r| r.to_string())
            .unwrap_or_default();
        writeln!(
            writer,
            "{},{},{},{},{},{}",
            experiment,
            report.consensus,
            state_cells(&report.consensus_value),
            round,
            report.final_spread,
            state_cells(&report.bias)
        )?;
    }
    Ok(())
}

/// Long-format per-round states: one row per (experiment, round, agent).
pub fn write_trajectories_csv<S: Scalar, W: Write>(
    mut writer: W,
    records: &[ExperimentRecord<S>],
) -> Result<(), RecordIoError> {
    let dim = records
        .first()
        .and_then(|r| r.initial_states.first())
        .map(|s| s.dimension())
        .unwrap_or(Dimension::One);
    writeln!(
        writer,
        "experiment,round,agent,{}",
        state_columns("state", dim)
    )?;
    for record in records {
        for (round, states) in record.trajectory().iter().enumerate() {
            for (agent, state) in states.iter().enumerate() {
                writeln!(
                    writer,
                    "{},{},{},{}",
                    record.experiment,
                    round,
                    agent,
                    state_cells(state)
                )?;
            }
        }
    }
    Ok(())
}

/// One row per Monte Carlo group.
pub fn write_summary_csv<W: Write>(
    mut writer: W,
    summaries: &[MonteCarloSummary],
) -> Result<(), RecordIoError> {
    writeln!(
        writer,
        "agents,profile,trials,mean_bias,var_bias,consensus_rate,mean_round"
    )?;
    for s in summaries {
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            s.agents,
            s.profile,
            s.trials,
            s.mean_bias,
            s.var_bias,
            s.consensus_rate,
            s.mean_round.map(|r| r.to_string()).unwrap_or_default()
        )?;
    }
    Ok(())
}

/// Robot trajectory log as CSV.
pub fn write_trajectory_points_csv<S: Scalar, W: Write>(
    mut writer: W,
    points: &[TrajectoryPoint<S>],
) -> Result<(), RecordIoError> {
    writeln!(writer, "time,robot_id,x,y,target_x,target_y")?;
    for p in points {
        writeln!(
            writer,
            "{},{},{},{},{},{}",
            p.time, p.robot, p.x, p.y, p.target_x, p.target_y
        )?;
    }
    Ok(())
}

/// Robot trajectory log as JSON Lines.
pub fn write_trajectory_points_jsonl<S: Scalar, W: Write>(
    mut writer: W,
    points: &[TrajectoryPoint<S>],
) -> Result<(), RecordIoError> {
    for p in points {
        serde_json::to_writer(&mut writer, p)
            .map_err(|source| RecordIoError::Json { line: 0, source })?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}
