//! On-disk configuration schemas and their resolution into engine configs.
//!
//! One JSON format, three shapes: a single-run config (has `agents`), a
//! Monte Carlo sweep config (has `sweep`), and the robot simulation config
//! (has `robots`). Validation failures carry field names so the operator can
//! fix the file without reading source.

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use consensus_core::aggregation::{AggregationConfig, SimTimingConfig};
use consensus_core::{
    BackendSpec, Dimension, ExperimentConfig, State, StrategyKind, StrategySpec, TopologySpec,
};

fn default_experiments() -> usize {
    1
}

fn default_rounds() -> usize {
    9
}

fn default_dimension() -> u8 {
    1
}

fn default_init_range() -> [f64; 2] {
    [0.0, 100.0]
}

fn default_clamp() -> bool {
    true
}

/// Agents as either a replicated backend or an explicit per-agent list.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AgentsField {
    Uniform {
        count: usize,
        backend: BackendSpec<f64>,
    },
    List(Vec<BackendSpec<f64>>),
}

impl AgentsField {
    fn resolve(&self, override_count: Option<usize>) -> Result<Vec<BackendSpec<f64>>> {
        match self {
            AgentsField::Uniform { count, backend } => {
                let n = override_count.unwrap_or(*count);
                Ok(vec![backend.clone(); n])
            }
            AgentsField::List(list) => {
                if let Some(n) = override_count {
                    if n != list.len() {
                        bail!(
                            "--agents {} conflicts with the explicit agents list of length {} \
                             (fields: agents)",
                            n,
                            list.len()
                        );
                    }
                }
                Ok(list.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleRunFile {
    #[serde(default = "default_experiments")]
    pub experiments: usize,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dimension")]
    pub dimension: u8,
    pub agents: AgentsField,
    #[serde(default)]
    pub topology: TopologySpec,
    #[serde(default = "default_init_range")]
    pub init_range: [f64; 2],
    #[serde(default)]
    pub init_states: Option<Vec<State<f64>>>,
    #[serde(default = "default_clamp")]
    pub clamp: bool,
    #[serde(default)]
    pub early_stop_eps: Option<f64>,
}

/// Command-line overrides applied on top of a config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunOverrides {
    pub experiments: Option<usize>,
    pub agents: Option<usize>,
    pub rounds: Option<usize>,
    pub seed: Option<u64>,
}

impl SingleRunFile {
    pub fn resolve(&self, overrides: &RunOverrides) -> Result<ExperimentConfig<f64>> {
        let config = ExperimentConfig {
            experiments: overrides.experiments.unwrap_or(self.experiments),
            rounds: overrides.rounds.unwrap_or(self.rounds),
            seed: overrides.seed.unwrap_or(self.seed),
            dimension: Dimension::try_from(self.dimension)
                .map_err(|e| anyhow::anyhow!("{e} (field: dimension)"))?,
            agents: self.agents.resolve(overrides.agents)?,
            topology: self.topology.clone(),
            init_range: self.init_range,
            init_states: self.init_states.clone(),
            clamp: self.clamp,
            early_stop_eps: self.early_stop_eps,
        };
        config.validate().context("invalid configuration")?;
        Ok(config)
    }
}

#[derive(Debug, Clone, Deserialize)]
pub struct NoiseProfile {
    pub label: String,
    pub sigma: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxes {
    pub agent_counts: Vec<usize>,
    pub noise_profiles: Vec<NoiseProfile>,
    pub trials: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub sweep: SweepAxes,
    #[serde(default = "default_rounds")]
    pub rounds: usize,
    #[serde(default)]
    pub seed: u64,
    /// Strategy rule every agent in the sweep runs.
    #[serde(default = "default_sweep_kind")]
    pub kind: StrategyKind,
    #[serde(default = "default_init_range")]
    pub init_range: [f64; 2],
    #[serde(default = "default_clamp")]
    pub clamp: bool,
}

fn default_sweep_kind() -> StrategyKind {
    StrategyKind::AverageIncludeSelf
}

/// One resolved sweep group: its key plus the batch config to run.
#[derive(Debug, Clone)]
pub struct SweepGroup {
    pub agents: usize,
    pub label: String,
    pub sigma: f64,
    pub config: ExperimentConfig<f64>,
}

impl SweepFile {
    pub fn resolve(&self, seed_override: Option<u64>) -> Result<Vec<SweepGroup>> {
        if self.sweep.trials == 0 {
            bail!("sweep.trials must be at least 1 (field: sweep.trials)");
        }
        if self.sweep.agent_counts.is_empty() || self.sweep.noise_profiles.is_empty() {
            bail!(
                "sweep axes must be non-empty (fields: sweep.agent_counts, sweep.noise_profiles)"
            );
        }
        let base_seed = seed_override.unwrap_or(self.seed);
        let mut groups = Vec::new();
        for (group_index, (&agents, profile)) in self
            .sweep
            .agent_counts
            .iter()
            .flat_map(|n| self.sweep.noise_profiles.iter().map(move |p| (n, p)))
            .enumerate()
        {
            let spec = StrategySpec::new(self.kind).with_noise(profile.sigma);
            let config = ExperimentConfig {
                experiments: self.sweep.trials,
                rounds: self.rounds,
                seed: consensus_core::seed::derive_seed(base_seed, group_index as u64),
                dimension: Dimension::One,
                agents: vec![BackendSpec::strategy(spec); agents],
                topology: TopologySpec::default(),
                init_range: self.init_range,
                init_states: None,
                clamp: self.clamp,
                early_stop_eps: None,
            };
            config.validate().with_context(|| {
                format!(
                    "invalid sweep group (agents={agents}, profile={})",
                    profile.label
                )
            })?;
            groups.push(SweepGroup {
                agents,
                label: profile.label.clone(),
                sigma: profile.sigma,
                config,
            });
        }
        Ok(groups)
    }
}

/// A run config file is either a single batch or a sweep.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum RunFile {
    Sweep(SweepFile),
    Single(SingleRunFile),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotsFile {
    pub robots: usize,
    #[serde(default)]
    pub initial_positions: Option<Vec<[f64; 2]>>,
    #[serde(default = "default_init_range")]
    pub init_range: [f64; 2],
    pub planner: BackendSpec<f64>,
    pub timing: SimTimingConfig<f64>,
    #[serde(default)]
    pub topology: TopologySpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k_p")]
    pub k_p: f64,
    #[serde(default = "default_v_max")]
    pub v_max: f64,
}

fn default_k_p() -> f64 {
    1.0
}

fn default_v_max() -> f64 {
    5.0
}

/// Planner selection override from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum PlannerChoice {
    /// Noise-free averaging strategy planner.
    Average,
    /// Chat-endpoint planner (see --endpoint).
    Llm,
}

impl RobotsFile {
    pub fn resolve(
        &self,
        seed_override: Option<u64>,
        planner: Option<PlannerChoice>,
        endpoint: Option<&str>,
    ) -> Result<AggregationConfig<f64>> {
        let planner_spec = match planner {
            None => self.planner.clone(),
            Some(PlannerChoice::Average) => {
                BackendSpec::strategy(StrategySpec::new(StrategyKind::AverageIncludeSelf))
            }
            Some(PlannerChoice::Llm) => match (&self.planner, endpoint) {
                (BackendSpec::Llm(cfg), None) => BackendSpec::Llm(cfg.clone()),
                (BackendSpec::Llm(cfg), Some(url)) => {
                    let mut cfg = cfg.clone();
                    cfg.base_url = url.to_string();
                    BackendSpec::Llm(cfg)
                }
                (_, endpoint) => {
                    let url = endpoint.unwrap_or("mock://average");
                    BackendSpec::Llm(consensus_core::LlmSessionConfig {
                        model: "mock".into(),
                        base_url: url.into(),
                        temperature: 0.0,
                        personality: Default::default(),
                        api_key_env: "CONSENSUS_LLM_API_KEY".into(),
                        timeout_secs: 30,
                        retry_limit: 3,
                        initial_backoff_ms: 500,
                        history_window: None,
                    })
                }
            },
        };
        let config = AggregationConfig {
            robots: self.robots,
            initial_positions: self.initial_positions.clone(),
            init_range: self.init_range,
            planners: vec![planner_spec; self.robots],
            timing: self.timing,
            topology: self.topology.clone(),
            seed: seed_override.unwrap_or(self.seed),
            k_p: self.k_p,
            v_max: self.v_max,
        };
        config.validate().context("invalid robots configuration")?;
        Ok(config)
    }
}

/// Parse a JSON config file with a line/column diagnostic on failure.
pub fn load_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| {
        anyhow::anyhow!(
            "{}: line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        )
    })
}
