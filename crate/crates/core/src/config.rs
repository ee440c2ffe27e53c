//! Experiment configuration: agent backends, topology, rounds, seeding.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::scalar::Scalar;
use crate::state::{Dimension, State};
use crate::strategy::{StrategyError, StrategySpec};
use crate::topology::{TopologyError, TopologySpec};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("experiments must be at least 1")]
    NoExperiments,
    #[error("agents list must not be empty")]
    NoAgents,
    #[error("topology does not fit the agent count: {source} (fields: topology, agents)")]
    Topology {
        #[from]
        source: TopologyError,
    },
    #[error("agent {index}: {source}")]
    Strategy { index: usize, source: StrategyError },
    #[error("agent {index}: temperature must be in [0, 2], got {value}")]
    Temperature { index: usize, value: f64 },
    #[error("init_range must be finite with low < high, got [{low}, {high}]")]
    InitRange { low: f64, high: f64 },
    #[error("init_states has {got} entries but the experiment has {agents} agents (fields: init_states, agents)")]
    InitStatesLength { got: usize, agents: usize },
    #[error("init_states[{index}] = {value} is outside init_range or has the wrong dimension")]
    InitStateValue { index: usize, value: String },
    #[error("early_stop_eps must be positive and finite")]
    EarlyStopEps,
}

/// Personality slot of the conversational role prompt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Personality {
    #[default]
    None,
    Stubborn,
    Suggestible,
}

fn default_api_key_env() -> String {
    "CONSENSUS_LLM_API_KEY".to_string()
}

fn default_timeout_secs() -> u64 {
    30
}

fn default_retry_limit() -> u32 {
    3
}

fn default_backoff_ms() -> u64 {
    500
}

/// Connection and session parameters for a chat-completions agent.
///
/// This is plain data; the conversational runtime lives in a separate crate.
/// The API key itself is never stored here, only the name of the
/// environment variable it is read from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmSessionConfig {
    pub model: String,
    /// Full URL of the chat-completions endpoint. The scheme `mock://` is
    /// reserved for the in-process offline endpoint.
    pub base_url: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default)]
    pub personality: Personality,
    #[serde(default = "default_api_key_env")]
    pub api_key_env: String,
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
    #[serde(default = "default_retry_limit")]
    pub retry_limit: u32,
    #[serde(default = "default_backoff_ms")]
    pub initial_backoff_ms: u64,
    /// Keep only the last N rounds of conversation when re-sending history.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history_window: Option<usize>,
}

/// Which decision machinery drives an agent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", bound = "S: Scalar")]
pub enum BackendSpec<S> {
    Strategy(StrategySpec<S>),
    Llm(LlmSessionConfig),
}

impl<S: Scalar> BackendSpec<S> {
    pub fn strategy(spec: StrategySpec<S>) -> Self {
        BackendSpec::Strategy(spec)
    }
}

fn default_clamp() -> bool {
    true
}

/// Full description of a batch of experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct ExperimentConfig<S> {
    /// Number of independent experiments in the batch.
    pub experiments: usize,
    /// Rounds of negotiation per experiment.
    pub rounds: usize,
    pub seed: u64,
    pub dimension: Dimension,
    /// One backend spec per agent.
    pub agents: Vec<BackendSpec<S>>,
    #[serde(default)]
    pub topology: TopologySpec,
    /// Bounds states are initialized in (and clamped to, when enabled).
    pub init_range: [S; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init_states: Option<Vec<State<S>>>,
    /// Clamp decided states back into `init_range` after each round.
    #[serde(default = "default_clamp")]
    pub clamp: bool,
    /// Stop an experiment early once the state spread falls below this.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub early_stop_eps: Option<S>,
}

impl<S: Scalar> ExperimentConfig<S> {
    /// A single-experiment config with default range, full topology, clamping
    /// on and no early stopping.
    pub fn new(agents: Vec<BackendSpec<S>>, rounds: usize, seed: u64) -> Self {
        Self {
            experiments: 1,
            rounds,
            seed,
            dimension: Dimension::One,
            agents,
            topology: TopologySpec::default(),
            init_range: [S::zero(), S::from_f64(100.0).unwrap()],
            init_states: None,
            clamp: true,
            early_stop_eps: None,
        }
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.experiments == 0 {
            return Err(ConfigError::NoExperiments);
        }
        if self.agents.is_empty() {
            return Err(ConfigError::NoAgents);
        }
        self.topology.build(self.agents.len())?;
        for (index, backend) in self.agents.iter().enumerate() {
            match backend {
                BackendSpec::Strategy(spec) => spec
                    .validate()
                    .map_err(|source| ConfigError::Strategy { index, source })?,
                BackendSpec::Llm(cfg) => {
                    if !(0.0..=2.0).contains(&cfg.temperature) {
                        return Err(ConfigError::Temperature {
                            index,
                            value: cfg.temperature,
                        });
                    }
                }
            }
        }
        let [low, high] = self.init_range;
        if !(low.is_finite() && high.is_finite() && low < high) {
            return Err(ConfigError::InitRange {
                low: low.to_f64().unwrap_or(f64::NAN),
                high: high.to_f64().unwrap_or(f64::NAN),
            });
        }
        if let Some(states) = &self.init_states {
            if states.len() != self.agents.len() {
                return Err(ConfigError::InitStatesLength {
                    got: states.len(),
                    agents: self.agents.len(),
                });
            }
            for (index, s) in states.iter().enumerate() {
                let in_range = s
                    .components()
                    .iter()
                    .all(|v| v.is_finite() && *v >= low && *v <= high);
                if s.dimension() != self.dimension || !in_range {
                    return Err(ConfigError::InitStateValue {
                        index,
                        value: s.to_string(),
                    });
                }
            }
        }
        if let Some(eps) = self.early_stop_eps {
            if !(eps > S::zero() && eps.is_finite()) {
                return Err(ConfigError::EarlyStopEps);
            }
        }
        Ok(())
    }

    /// Stable hash of the full configuration, used to stamp records.
    pub fn fingerprint(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        let mut out = String::with_capacity(16);
        for byte in &digest[..8] {
            out.push_str(&format!("{byte:02x}"));
        }
        out
    }
}
