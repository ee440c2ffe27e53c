//! The experiment runner: per-round observation, decision, synchronous state
//! update, and record accumulation.
//!
//! Every agent in a round sees the state vector as it stood when the round
//! began; the vector only advances once all decisions are in. That makes the
//! update order-independent, which the tests rely on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{AgentBackend, BackendError, BackendFactory, Decision};
use crate::config::{ConfigError, ExperimentConfig};
use crate::scalar::Scalar;
use crate::seed;
use crate::state::{spread, Dimension, State};
use crate::strategy::Observation;
use crate::topology::ConnectivityMatrix;

/// Record schema version stamped on every experiment record.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("agent {agent}: backend could not be created: {source}")]
    BackendCreation { agent: usize, source: BackendError },
}

/// One agent's recorded output for one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord<S> {
    /// Chosen state as reported by the backend, before any clamping.
    pub position: State<S>,
    pub reasoning: String,
    /// True when the backend failed and the agent held its previous state.
    pub error: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord<S> {
    pub round: usize,
    pub states_before: Vec<State<S>>,
    pub decisions: Vec<DecisionRecord<S>>,
    /// Chosen states after clamping; becomes the next round's states_before.
    pub states_after: Vec<State<S>>,
}

/// Full history of one experiment, emitted as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord<S> {
    pub schema: u32,
    pub experiment: usize,
    pub seed: u64,
    pub config_fingerprint: String,
    pub initial_states: Vec<State<S>>,
    pub rounds: Vec<RoundRecord<S>>,
    pub final_states: Vec<State<S>>,
}

impl<S: Scalar> ExperimentRecord<S> {
    /// Per-agent state trajectory: initial states followed by each round's
    /// outcome, so entry `t` is the state after `t` rounds.
    pub fn trajectory(&self) -> Vec<Vec<State<S>>> {
        let mut points = Vec::with_capacity(self.rounds.len() + 1);
        points.push(self.initial_states.clone());
        for round in &self.rounds {
            points.push(round.states_after.clone());
        }
        points
    }

    /// Number of decisions that fell back because a backend failed.
    pub fn fallback_count(&self) -> usize {
        self.rounds
            .iter()
            .flat_map(|r| &r.decisions)
            .filter(|d| d.error)
            .count()
    }
}

/// Execution knobs that do not affect record content.
#[derive(Debug, Clone, Copy)]
pub struct ExecOptions {
    /// Experiments evaluated concurrently within a batch.
    pub batch_jobs: usize,
    /// Agent decisions evaluated concurrently within one round.
    pub round_jobs: usize,
}

impl Default for ExecOptions {
    fn default() -> Self {
        Self {
            batch_jobs: 1,
            round_jobs: 1,
        }
    }
}

fn draw_initial_states<S: Scalar>(
    config: &ExperimentConfig<S>,
    experiment_seed: u64,
) -> Vec<State<S>> {
    if let Some(states) = &config.init_states {
        return states.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed::init_seed(experiment_seed));
    let [low, high] = config.init_range;
    (0..config.agent_count())
        .map(|_| match config.dimension {
            Dimension::One => State::Scalar(S::sample_uniform(&mut rng, low, high)),
            Dimension::Two => {
                let x = S::sample_uniform(&mut rng, low, high);
                let y = S::sample_uniform(&mut rng, low, high);
                State::Planar([x, y])
            }
        })
        .collect()
}

fn observation_for<S: Scalar>(
    topology: &ConnectivityMatrix,
    snapshot: &[State<S>],
    agent: usize,
    round: usize,
) -> Observation<S> {
    Observation {
        self_state: snapshot[agent],
        neighbor_states: topology.neighbors_of(agent).map(|j| snapshot[j]).collect(),
        round,
    }
}

fn decide_or_hold<S: Scalar>(
    backend: &mut Box<dyn AgentBackend<S>>,
    obs: &Observation<S>,
) -> DecisionRecord<S> {
    match backend.decide(obs) {
        Ok(Decision {
            position,
            reasoning,
        }) => DecisionRecord {
            position,
            reasoning,
            error: false,
        },
        Err(err) => DecisionRecord {
            position: obs.self_state,
            reasoning: format!(
                "backend failure ({}): holding previous state",
                err.kind_label()
            ),
            error: true,
        },
    }
}

/// Run one experiment of the batch.
pub fn run_experiment<S: Scalar>(
    config: &ExperimentConfig<S>,
    experiment_index: usize,
    factory: &dyn BackendFactory<S>,
) -> Result<ExperimentRecord<S>, EngineError> {
    run_experiment_opts(config, experiment_index, factory, &ExecOptions::default())
}

pub fn run_experiment_opts<S: Scalar>(
    config: &ExperimentConfig<S>,
    experiment_index: usize,
    factory: &dyn BackendFactory<S>,
    opts: &ExecOptions,
) -> Result<ExperimentRecord<S>, EngineError> {
    config.validate()?;
    let topology = config
        .topology
        .build(config.agent_count())
        .map_err(ConfigError::from)?;
    let experiment_seed = seed::experiment_seed(config.seed, experiment_index);

    let mut backends: Vec<Box<dyn AgentBackend<S>>> = config
        .agents
        .iter()
        .enumerate()
        .map(|(k, spec)| {
            factory
                .create(k, spec, seed::agent_seed(experiment_seed, k))
                .map_err(|source| EngineError::BackendCreation { agent: k, source })
        })
        .collect::<Result<_, _>>()?;

    let initial_states = draw_initial_states(config, experiment_seed);
    let [low, high] = config.init_range;

    let mut states = initial_states.clone();
    let mut rounds = Vec::with_capacity(config.rounds);
    for round in 0..config.rounds {
        let snapshot = states.clone();
        let observations: Vec<Observation<S>> = (0..config.agent_count())
            .map(|k| observation_for(&topology, &snapshot, k, round))
            .collect();

        // All decisions read the same snapshot; the barrier is the end of
        // this collect.
        let decisions: Vec<DecisionRecord<S>> = if opts.round_jobs > 1 {
            backends
                .par_iter_mut()
                .zip(observations.par_iter())
                .map(|(backend, obs)| decide_or_hold(backend, obs))
                .collect()
        } else {
            backends
                .iter_mut()
                .zip(observations.iter())
                .map(|(backend, obs)| decide_or_hold(backend, obs))
                .collect()
        };

        let states_after: Vec<State<S>> = decisions
            .iter()
            .map(|d| {
                if config.clamp {
                    d.position.clamp_to(low, high)
                } else {
                    d.position
                }
            })
            .collect();

        states = states_after.clone();
        rounds.push(RoundRecord {
            round,
            states_before: snapshot,
            decisions,
            states_after,
        });

        if let Some(eps) = config.early_stop_eps {
            if spread(&states) < eps {
                break;
            }
        }
    }

    Ok(ExperimentRecord {
        schema: SCHEMA_VERSION,
        experiment: experiment_index,
        seed: experiment_seed,
        config_fingerprint: config.fingerprint(),
        initial_states,
        rounds,
        final_states: states,
    })
}

/// Run the whole batch; records come back in experiment order regardless of
/// execution order.
pub fn run_batch<S: Scalar>(
    config: &ExperimentConfig<S>,
    factory: &dyn BackendFactory<S>,
) -> Result<Vec<ExperimentRecord<S>>, EngineError> {
    run_batch_opts(config, factory, &ExecOptions::default())
}

pub fn run_batch_opts<S: Scalar>(
    config: &ExperimentConfig<S>,
    factory: &dyn BackendFactory<S>,
    opts: &ExecOptions,
) -> Result<Vec<ExperimentRecord<S>>, EngineError> {
    config.validate()?;
    if opts.batch_jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.batch_jobs)
            .build()
            .expect("thread pool");
        pool.install(|| {
            (0..config.experiments)
                .into_par_iter()
                .map(|i| run_experiment_opts(config, i, factory, opts))
                .collect()
        })
    } else {
        (0..config.experiments)
            .map(|i| run_experiment_opts(config, i, factory, opts))
            .collect()
    }
}
