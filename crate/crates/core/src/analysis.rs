//! Turning experiment records into reported quantities: consensus detection,
//! convergence speed, bias statistics, oscillation and cluster detection.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::ExperimentRecord;
use crate::scalar::Scalar;
use crate::state::{spread, State};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("eps must be positive, got {0}")]
    InvalidEps(String),
    #[error("oscillation window must be at least 4, got {0}")]
    InvalidWindow(usize),
    #[error("within-cluster eps ({eps}) must be smaller than the gap threshold ({gap})")]
    EpsNotBelowGap { eps: String, gap: String },
}

/// Did the run converge, to what value, and how fast.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport<S> {
    pub consensus: bool,
    /// Mean of the final states; the agreed value when `consensus` is true.
    pub consensus_value: State<S>,
    /// First round index after which the spread stays below eps.
    pub convergence_round: Option<usize>,
    /// Max minus min at the last recorded round.
    pub final_spread: S,
    /// consensus_value minus the mean of the initial states.
    pub bias: State<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationReport {
    pub oscillating: bool,
    /// Only period-2 cycles are detected; the field exists so readers of the
    /// serialized report know which period was flagged.
    pub period: usize,
    pub participants: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster<S> {
    /// Componentwise mean of the member states.
    pub representative: State<S>,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport<S> {
    pub clusters: Vec<Cluster<S>>,
    pub eps: S,
    pub gap: S,
}

/// Per-group statistics for a Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub agents: usize,
    pub profile: String,
    pub trials: usize,
    pub mean_bias: f64,
    /// Population variance of the per-trial bias.
    pub var_bias: f64,
    pub consensus_rate: f64,
    /// Mean convergence round over converged trials; none if no trial
    /// converged.
    pub mean_round: Option<f64>,
}

/// Scan a record for consensus: the spread must fall below `eps` and stay
/// there through the final round.
pub fn detect_consensus<S: Scalar>(
    record: &ExperimentRecord<S>,
    eps: S,
) -> Result<ConvergenceReport<S>, AnalysisError> {
    if !(eps > S::zero()) {
        return Err(AnalysisError::InvalidEps(eps.to_string()));
    }
    let trajectory = record.trajectory();
    let spreads: Vec<S> = trajectory.iter().map(|states| spread(states)).collect();
    let final_spread = *spreads.last().expect("trajectory has >= 1 point");
    let consensus = final_spread < eps;

    let convergence_round = if consensus {
        // walk back over the suffix where the spread stays below eps
        let mut round = spreads.len() - 1;
        while round > 0 && spreads[round - 1] < eps {
            round -= 1;
        }
        Some(round)
    } else {
        None
    };

    let consensus_value =
        State::mean_of(record.final_states.iter()).expect("records have >= 1 agent");
    let initial_mean =
        State::mean_of(record.initial_states.iter()).expect("records have >= 1 agent");
    let bias = consensus_value.zip_map(initial_mean, |a, b| a - b);

    Ok(ConvergenceReport {
        consensus,
        consensus_value,
        convergence_round,
        final_spread,
        bias,
    })
}

/// Flag agents whose trailing states satisfy `x(t) = x(t-2) != x(t-1)`.
///
/// `tol` is the equality tolerance; zero demands exact equality, which is the
/// right setting for noise-free runs.
#[allow(clippy::needless_range_loop)]
pub fn detect_oscillation<S: Scalar>(
    record: &ExperimentRecord<S>,
    window: usize,
    tol: S,
) -> Result<OscillationReport, AnalysisError> {
    if window < 4 {
        return Err(AnalysisError::InvalidWindow(window));
    }
    let trajectory = record.trajectory();
    let points = trajectory.len();
    let effective = window.min(points);
    if effective < 4 {
        return Ok(OscillationReport {
            oscillating: false,
            period: 2,
            participants: Vec::new(),
        });
    }
    let start = points - effective;
    let agents = record.initial_states.len();
    let mut participants = Vec::new();
    for agent in 0..agents {
        let osc = (start + 2..points).all(|t| {
            let x_t = trajectory[t][agent];
            let two_back = trajectory[t - 2][agent];
            let one_back = trajectory[t - 1][agent];
            x_t.linf_distance(&two_back) <= tol && x_t.linf_distance(&one_back) > tol
        });
        if osc {
            participants.push(agent);
        }
    }
    Ok(OscillationReport {
        oscillating: !participants.is_empty(),
        period: 2,
        participants,
    })
}

/// Single-linkage clustering with merge threshold `gap`: states closer than
/// `gap` (through any chain) share a cluster. On sorted 1-D data this is
/// exactly "split where adjacent values differ by at least gap".
pub fn detect_clusters<S: Scalar>(
    states: &[State<S>],
    eps: S,
    gap: S,
) -> Result<ClusterReport<S>, AnalysisError> {
    if !(eps < gap) {
        return Err(AnalysisError::EpsNotBelowGap {
            eps: eps.to_string(),
            gap: gap.to_string(),
        });
    }
    let n = states.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let distance = states[i].zip_map(states[j], |a, b| a - b).norm();
            if distance < gap {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_to_group: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        match root_to_group[root] {
            Some(g) => groups[g].push(i),
            None => {
                root_to_group[root] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }

    let mut clusters: Vec<Cluster<S>> = groups
        .into_iter()
        .map(|members| {
            let representative =
                State::mean_of(members.iter().map(|&i| &states[i])).expect("non-empty group");
            Cluster {
                representative,
                members,
            }
        })
        .collect();
    clusters.sort_by(|a, b| {
        a.representative.components()[0]
            .partial_cmp(&b.representative.components()[0])
            .expect("finite representatives")
    });
    Ok(ClusterReport { clusters, eps, gap })
}

/// A sweep group: agent count, profile label, and the records it produced.
pub type RecordGroup<S> = (usize, String, Vec<ExperimentRecord<S>>);

/// Per-group bias statistics over grouped record lists.
///
/// Bias is the scalar mean of the components of each record's bias state; for
/// 1-D records that is just the signed bias. Statistics cover all trials;
/// the convergence-round mean covers converged trials only. Variance is the
/// population variance, so a single-record group reports zero.
pub fn summarize<S: Scalar>(
    groups: &[RecordGroup<S>],
    eps: S,
) -> Result<Vec<MonteCarloSummary>, AnalysisError> {
    let mut summaries = Vec::with_capacity(groups.len());
    for (agents, profile, records) in groups {
        let mut mean = 0.0f64;
        let mut m2 = 0.0f64;
        let mut count = 0usize;
        let mut converged = 0usize;
        let mut round_sum = 0.0f64;
        for record in records {
            let report = detect_consensus(record, eps)?;
            let bias_components = report.bias.components();
            let bias: f64 = bias_components
                .iter()
                .map(|v| v.to_f64().expect("finite bias"))
                .sum::<f64>()
                / bias_components.len() as f64;
            count += 1;
            let delta = bias - mean;
            mean += delta / count as f64;
            m2 += delta * (bias - mean);
            if report.consensus {
                converged += 1;
                round_sum += report.convergence_round.unwrap_or(0) as f64;
            }
        }
        summaries.push(MonteCarloSummary {
            agents: *agents,
            profile: profile.clone(),
            trials: count,
            mean_bias: if count > 0 { mean } else { 0.0 },
            var_bias: if count > 0 { m2 / count as f64 } else { 0.0 },
            consensus_rate: if count > 0 {
                converged as f64 / count as f64
            } else {
                0.0
            },
            mean_round: (converged > 0).then(|| round_sum / converged as f64),
        });
    }
    Ok(summaries)
}
