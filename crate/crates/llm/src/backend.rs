//! Conversational agent backend and the factory the engine uses to build it.

use std::sync::Mutex;

use consensus_core::backend::{
    AgentBackend, BackendError, BackendFactory, Decision, StrategyBackend,
};
use consensus_core::{BackendSpec, Dimension, LlmSessionConfig, Observation, Scalar};

use crate::client::{ChatClient, ClientError};
use crate::mock::{MockBehavior, MockChatServer};
use crate::session::{AgentSession, SessionError};

/// An agent driven by a chat endpoint: keeps its conversation, renders the
/// round prompt, and parses positions out of replies.
pub struct LlmBackend {
    session: AgentSession,
    client: ChatClient,
}

impl LlmBackend {
    pub fn new(config: &LlmSessionConfig, agent_index: usize) -> Result<Self, ClientError> {
        Ok(Self {
            session: AgentSession::new(agent_index, config.personality, config.history_window),
            client: ChatClient::new(config)?,
        })
    }

    pub fn session(&self) -> &AgentSession {
        &self.session
    }
}

impl<S: Scalar> AgentBackend<S> for LlmBackend {
    fn decide(&mut self, obs: &Observation<S>) -> Result<Decision<S>, BackendError> {
        match self.session.step(obs, &self.client) {
            Ok((position, reply)) => Ok(Decision {
                position,
                reasoning: reply,
            }),
            Err(SessionError::ParseExhausted { attempts, source }) => Err(BackendError::Exhausted(
                format!("{source} ({attempts} attempts)"),
            )),
            Err(SessionError::Client(ClientError::Exhausted { attempts, last })) => Err(
                BackendError::Transport(format!("{last} ({attempts} attempts)")),
            ),
            Err(SessionError::Client(err)) => Err(BackendError::Transport(err.to_string())),
        }
    }
}

/// Factory covering both backend kinds: strategy specs run locally, llm specs
/// get a session against their configured endpoint.
///
/// The URL `mock://average` stands for the in-process offline endpoint; the
/// factory spawns one lazily and keeps it alive for its own lifetime.
pub struct ConversationalFactory {
    dimension: Dimension,
    mock: Mutex<Option<MockChatServer>>,
}

impl ConversationalFactory {
    pub fn new(dimension: Dimension) -> Self {
        Self {
            dimension,
            mock: Mutex::new(None),
        }
    }

    fn resolve_url(&self, base_url: &str) -> Result<String, BackendError> {
        if let Some(behavior) = base_url.strip_prefix("mock://") {
            if behavior != "average" {
                return Err(BackendError::Unsupported(format!(
                    "unknown mock behavior '{behavior}' (only mock://average is built in)"
                )));
            }
            let mut guard = self.mock.lock().expect("mock lock");
            if guard.is_none() {
                let server = MockChatServer::spawn(MockBehavior::Average, self.dimension)
                    .map_err(|e| BackendError::Transport(e.to_string()))?;
                *guard = Some(server);
            }
            Ok(guard.as_ref().expect("just spawned").url())
        } else {
            Ok(base_url.to_string())
        }
    }
}

impl<S: Scalar> BackendFactory<S> for ConversationalFactory {
    fn create(
        &self,
        agent_index: usize,
        spec: &BackendSpec<S>,
        seed: u64,
    ) -> Result<Box<dyn AgentBackend<S>>, BackendError> {
        match spec {
            BackendSpec::Strategy(s) => Ok(Box::new(StrategyBackend::new(*s, seed))),
            BackendSpec::Llm(config) => {
                let mut resolved = config.clone();
                resolved.base_url = self.resolve_url(&config.base_url)?;
                let backend = LlmBackend::new(&resolved, agent_index)
                    .map_err(|e| BackendError::Transport(e.to_string()))?;
                Ok(Box::new(backend))
            }
        }
    }
}
