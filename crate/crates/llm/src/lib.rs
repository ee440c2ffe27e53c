//! Conversational agent runtime: prompt templates, reply parsing, a retrying
//! chat-completions client, per-agent sessions, and a deterministic offline
//! mock endpoint.

pub mod backend;
pub mod client;
pub mod mock;
pub mod parse;
pub mod prompt;
pub mod session;

pub use backend::{ConversationalFactory, LlmBackend};
pub use client::{ChatClient, ChatMessage, ClientError};
pub use mock::{MockBehavior, MockChatServer};
pub use parse::{parse_position, ParseError};
pub use prompt::{render_role_prompt, render_round_prompt};
pub use session::{AgentSession, SessionError};
