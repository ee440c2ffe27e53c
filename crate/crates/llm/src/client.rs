//! Minimal chat-completions HTTP client with timeout, exponential backoff,
//! and bearer-token auth read from the environment.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use consensus_core::LlmSessionConfig;

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("could not build http client: {0}")]
    Build(String),
    #[error("request failed after {attempts} attempts: {last}")]
    Exhausted { attempts: u32, last: String },
    #[error("endpoint returned status {status}")]
    Status { status: u16 },
    #[error("response had no choices")]
    EmptyResponse,
    #[error("response body was not valid chat json: {0}")]
    BadBody(String),
}

/// One message of a conversation, in wire format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: "system".into(),
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: "user".into(),
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: "assistant".into(),
            content: content.into(),
        }
    }
}

#[derive(Serialize)]
struct ChatRequest<'a> {
    model: &'a str,
    temperature: f64,
    messages: &'a [ChatMessage],
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: String,
}

/// Resolved endpoint: URL, model, sampling temperature, and retry policy.
/// The API key is read from the configured environment variable once, at
/// construction, and never serialized or logged.
pub struct ChatClient {
    http: reqwest::blocking::Client,
    url: String,
    model: String,
    temperature: f64,
    api_key: Option<String>,
    retry_limit: u32,
    initial_backoff: Duration,
}

const MAX_BACKOFF: Duration = Duration::from_secs(30);

impl ChatClient {
    pub fn new(config: &LlmSessionConfig) -> Result<Self, ClientError> {
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(config.timeout_secs))
            .build()
            .map_err(|e| ClientError::Build(e.to_string()))?;
        Ok(Self {
            http,
            url: config.base_url.clone(),
            model: config.model.clone(),
            temperature: config.temperature,
            api_key: std::env::var(&config.api_key_env).ok(),
            retry_limit: config.retry_limit,
            initial_backoff: Duration::from_millis(config.initial_backoff_ms),
        })
    }

    pub fn retry_limit(&self) -> u32 {
        self.retry_limit
    }

    fn attempt(&self, messages: &[ChatMessage]) -> Result<String, ClientError> {
        let request = ChatRequest {
            model: &self.model,
            temperature: self.temperature,
            messages,
        };
        let mut builder = self.http.post(&self.url).json(&request);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| ClientError::Exhausted {
            attempts: 1,
            last: transport_label(&e),
        })?;
        let status = response.status();
        if !status.is_success() {
            return Err(ClientError::Status {
                status: status.as_u16(),
            });
        }
        let body: ChatResponse = response
            .json()
            .map_err(|e| ClientError::BadBody(transport_label(&e)))?;
        body.choices
            .into_iter()
            .next()
            .map(|c| c.message.content)
            .ok_or(ClientError::EmptyResponse)
    }

    /// Send the conversation, retrying transport errors and retryable HTTP
    /// statuses with exponential backoff. Total attempts: retry_limit + 1.
    pub fn complete(&self, messages: &[ChatMessage]) -> Result<String, ClientError> {
        let mut backoff = self.initial_backoff;
        let mut last = String::new();
        let attempts = self.retry_limit + 1;
        for attempt in 0..attempts {
            match self.attempt(messages) {
                Ok(reply) => return Ok(reply),
                Err(ClientError::Status { status }) if !retryable_status(status) => {
                    return Err(ClientError::Status { status });
                }
                Err(err) => {
                    last = match err {
                        ClientError::Exhausted { last, .. } => last,
                        other => other.to_string(),
                    };
                }
            }
            if attempt + 1 < attempts {
                std::thread::sleep(backoff);
                backoff = (backoff * 2).min(MAX_BACKOFF);
            }
        }
        Err(ClientError::Exhausted { attempts, last })
    }
}

fn retryable_status(status: u16) -> bool {
    status == 429 || (500..600).contains(&status)
}

/// Errors end up in logs; keep them free of URLs (which embed ports and
/// would make otherwise-deterministic output vary).
fn transport_label(e: &reqwest::Error) -> String {
    if e.is_timeout() {
        "timeout".into()
    } else if e.is_connect() {
        "connect error".into()
    } else {
        "transport error".into()
    }
}
