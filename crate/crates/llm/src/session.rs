//! Per-agent conversation state across rounds.

use thiserror::Error;

use consensus_core::{Observation, Personality, Scalar, State};

use crate::client::{ChatClient, ChatMessage, ClientError};
use crate::parse::{parse_position, ParseError};
use crate::prompt::{render_role_prompt, render_round_prompt};

#[derive(Debug, Error)]
pub enum SessionError {
    #[error(transparent)]
    Client(#[from] ClientError),
    #[error("no parsable position after {attempts} attempts: {source}")]
    ParseExhausted { attempts: u32, source: ParseError },
}

const CLARIFY: &str = "Please reply with the position you choose, stated in the exact \
                       form \"Position: <number>\".";

/// One agent's chat session. The durable history starts with the role prompt
/// and grows by exactly one user and one assistant message per successful
/// round; clarification retries happen on a transient copy and are not kept.
pub struct AgentSession {
    pub agent_index: usize,
    pub personality: Personality,
    history: Vec<ChatMessage>,
    history_window: Option<usize>,
}

impl AgentSession {
    pub fn new(
        agent_index: usize,
        personality: Personality,
        history_window: Option<usize>,
    ) -> Self {
        Self {
            agent_index,
            personality,
            history: vec![ChatMessage::system(render_role_prompt(personality))],
            history_window,
        }
    }

    pub fn history(&self) -> &[ChatMessage] {
        &self.history
    }

    /// Conversation actually sent: the system prompt plus the last
    /// `history_window` rounds when a window is configured.
    fn effective_history(&self) -> Vec<ChatMessage> {
        match self.history_window {
            None => self.history.clone(),
            Some(window) => {
                let tail = 2 * window;
                let body = &self.history[1..];
                let keep = body.len().saturating_sub(tail);
                let mut messages = vec![self.history[0].clone()];
                messages.extend_from_slice(&body[keep..]);
                messages
            }
        }
    }

    /// Run one round: render the prompt, query the endpoint, parse the reply.
    /// Parse failures re-ask with a clarification up to the client's retry
    /// limit before giving up.
    pub fn step<S: Scalar>(
        &mut self,
        obs: &Observation<S>,
        client: &ChatClient,
    ) -> Result<(State<S>, String), SessionError> {
        let prompt = render_round_prompt(obs);
        let dimension = obs.self_state.dimension();

        let mut transient = self.effective_history();
        transient.push(ChatMessage::user(prompt.clone()));

        let attempts = client.retry_limit() + 1;
        let mut last_parse_error = ParseError::NoNumber;
        for _ in 0..attempts {
            let reply = client.complete(&transient)?;
            match parse_position::<S>(&reply, dimension) {
                Ok(state) => {
                    self.history.push(ChatMessage::user(prompt));
                    self.history.push(ChatMessage::assistant(reply.clone()));
                    return Ok((state, reply));
                }
                Err(err) => {
                    last_parse_error = err;
                    transient.push(ChatMessage::assistant(reply));
                    transient.push(ChatMessage::user(CLARIFY.to_string()));
                }
            }
        }
        Err(SessionError::ParseExhausted {
            attempts,
            source: last_parse_error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn history_starts_with_role_prompt() {
        let session = AgentSession::new(0, Personality::Stubborn, None);
        assert_eq!(session.history().len(), 1);
        assert_eq!(session.history()[0].role, "system");
        assert!(session.history()[0]
            .content
            .ends_with("prefer to remain stationary."));
    }

    #[test]
    fn windowed_history_keeps_system_and_tail() {
        let mut session = AgentSession::new(0, Personality::None, Some(1));
        for round in 0..3 {
            session.history.push(ChatMessage::user(format!("u{round}")));
            session
                .history
                .push(ChatMessage::assistant(format!("a{round}")));
        }
        let effective = session.effective_history();
        assert_eq!(effective.len(), 3);
        assert_eq!(effective[0].role, "system");
        assert_eq!(effective[1].content, "u2");
        assert_eq!(effective[2].content, "a2");
    }
}
