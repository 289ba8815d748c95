//! Minimal chat-completion client layer: a trait the harness talks to, an
//! HTTP implementation for any endpoint speaking the common
//! messages/temperature wire shape, and a deterministic offline mock.

mod http;
mod mock;

pub use http::{ClientConfig, HttpChatClient};
pub use mock::{MockClient, MockSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ROLE_SYSTEM: &str = "system";
pub const ROLE_USER: &str = "user";
pub const ROLE_ASSISTANT: &str = "assistant";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: ROLE_SYSTEM.into(), content: content.into() }
    }
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: ROLE_USER.into(), content: content.into() }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: ROLE_ASSISTANT.into(), content: content.into() }
    }
}

/// One completed exchange.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Completion {
    pub text: String,
    pub prompt_tokens: Option<u64>,
    pub completion_tokens: Option<u64>,
    /// Transport retries spent on this call.
    pub retries: u32,
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("auth token environment variable {var} is not set")]
    Auth { var: String },
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("transport failure after {attempts} attempt(s): {detail}")]
    Transport { detail: String, attempts: u32 },
    #[error("endpoint returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed response: {detail}")]
    MalformedResponse { detail: String },
    #[error("mock reply script exhausted after {calls} call(s)")]
    MockExhausted { calls: u32 },
}

/// Anything that can answer a chat prompt. Implementations must be
/// deterministic given their own state for reproducible offline runs.
pub trait ChatClient {
    fn complete(
        &mut self,
        model: &str,
        messages: &[ChatMessage],
        temperature: f64,
    ) -> Result<Completion, ClientError>;
}
