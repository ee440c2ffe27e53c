//! Agent backend abstraction: anything that can turn an observation into a
//! decision. The strategy backend lives here; conversational backends plug in
//! through the same trait.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::BackendSpec;
use crate::scalar::Scalar;
use crate::state::State;
use crate::strategy::{
    canonical_reply, decide_detailed, reasoning_sentence, Observation, StrategySpec,
};

/// One agent's output for a round: the position it chose and the reply text
/// explaining it.
#[derive(Debug, Clone, PartialEq)]
pub struct Decision<S> {
    pub position: State<S>,
    pub reasoning: String,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("could not extract a position: {0}")]
    Parse(String),
    #[error("retries exhausted: {0}")]
    Exhausted(String),
    #[error("invalid observation or spec: {0}")]
    Invalid(String),
    #[error("backend unsupported here: {0}")]
    Unsupported(String),
}

impl BackendError {
    /// Short stable label recorded when the engine falls back to the previous
    /// state; kept free of URLs and ports so records stay reproducible.
    pub fn kind_label(&self) -> &'static str {
        match self {
            BackendError::Transport(_) => "transport",
            BackendError::Parse(_) => "parse",
            BackendError::Exhausted(_) => "exhausted",
            BackendError::Invalid(_) => "invalid",
            BackendError::Unsupported(_) => "unsupported",
        }
    }
}

/// A stateful per-agent decision maker, queried once per round.
pub trait AgentBackend<S: Scalar>: Send {
    fn decide(&mut self, obs: &Observation<S>) -> Result<Decision<S>, BackendError>;
}

/// Builds fresh backends for each experiment so sessions and RNG streams
/// never leak across experiments.
pub trait BackendFactory<S: Scalar>: Sync {
    fn create(
        &self,
        agent_index: usize,
        spec: &BackendSpec<S>,
        seed: u64,
    ) -> Result<Box<dyn AgentBackend<S>>, BackendError>;
}

/// Rule-driven backend with its own seeded RNG.
pub struct StrategyBackend<S> {
    spec: StrategySpec<S>,
    rng: ChaCha8Rng,
}

impl<S: Scalar> StrategyBackend<S> {
    pub fn new(spec: StrategySpec<S>, seed: u64) -> Self {
        Self {
            spec,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl<S: Scalar> AgentBackend<S> for StrategyBackend<S> {
    fn decide(&mut self, obs: &Observation<S>) -> Result<Decision<S>, BackendError> {
        let decision = decide_detailed(&self.spec, obs, &mut self.rng)
            .map_err(|e| BackendError::Invalid(e.to_string()))?;
        Ok(Decision {
            reasoning: canonical_reply(reasoning_sentence(decision.applied), &decision.position),
            position: decision.position,
        })
    }
}

/// Factory for pure strategy runs; rejects conversational specs.
pub struct StrategyOnlyFactory;

impl<S: Scalar> BackendFactory<S> for StrategyOnlyFactory {
    fn create(
        &self,
        _agent_index: usize,
        spec: &BackendSpec<S>,
        seed: u64,
    ) -> Result<Box<dyn AgentBackend<S>>, BackendError> {
        match spec {
            BackendSpec::Strategy(s) => Ok(Box::new(StrategyBackend::new(*s, seed))),
            BackendSpec::Llm(_) => Err(BackendError::Unsupported(
                "llm agents need the conversational runtime factory".into(),
            )),
        }
    }
}
