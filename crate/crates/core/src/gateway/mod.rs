//! Chat-completions access: a live HTTP client, a deterministic offline mock,
//! and an audit log that can be replayed.

mod audit;
mod http;
mod mock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompt::PromptSpec;

pub use audit::{AuditRecord, AuditingGateway, ReplayGateway};
pub use http::{HttpGateway, LlmConfig};
pub use mock::MockGateway;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CompletionResult {
    /// The assistant message exactly as returned.
    pub text: String,
    pub model_id: String,
    pub latency_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_id: Option<String>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GatewayError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited after {attempts} attempt(s)")]
    RateLimited { attempts: u32 },
    #[error("timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("server error {status} after {attempts} attempt(s)")]
    Server { status: u16, attempts: u32 },
    #[error("request rejected with status {status}: {message}")]
    Rejected { status: u16, message: String },
    #[error("transport failure after {attempts} attempt(s): {message}")]
    Transport { message: String, attempts: u32 },
    #[error("malformed response: {0}")]
    MalformedResponse(String),
    #[error("no recorded completion for prompt {0}")]
    NotRecorded(String),
    #[error("audit log: {0}")]
    Audit(String),
}

/// Anything that turns a prompt into a completion.
pub trait CompletionGateway: Send + Sync {
    fn complete(&self, prompt: &PromptSpec, model: &str) -> Result<CompletionResult, GatewayError>;
}

impl<G: CompletionGateway + ?Sized> CompletionGateway for std::sync::Arc<G> {
    fn complete(&self, prompt: &PromptSpec, model: &str) -> Result<CompletionResult, GatewayError> {
        (**self).complete(prompt, model)
    }
}

impl<G: CompletionGateway + ?Sized> CompletionGateway for Box<G> {
    fn complete(&self, prompt: &PromptSpec, model: &str) -> Result<CompletionResult, GatewayError> {
        (**self).complete(prompt, model)
    }
}

/// Key under which prompts are stored in mock tables and audit logs.
pub fn prompt_hash(text: &str) -> String {
    crate::digest::sha256_hex(text)
}
