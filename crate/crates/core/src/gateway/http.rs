use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{CompletionGateway, CompletionResult, GatewayError};
use crate::prompt::PromptSpec;

pub const DEFAULT_ENDPOINT: &str = "https://api.openai.com/v1/chat/completions";
pub const DEFAULT_KEY_VARIABLE: &str = "OPENAI_API_KEY";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct LlmConfig {
    pub endpoint_url: String,
    pub model_id: String,
    /// Name of the environment variable holding the API key.
    pub api_key_source: String,
    pub timeout_secs: u64,
    pub max_retries: u32,
    pub backoff_ms: u64,
    pub concurrency: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint_url: DEFAULT_ENDPOINT.into(),
            model_id: "gpt-3.5-turbo".into(),
            api_key_source: DEFAULT_KEY_VARIABLE.into(),
            timeout_secs: 60,
            max_retries: 3,
            backoff_ms: 500,
            concurrency: 4,
        }
    }
}

impl LlmConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.timeout_secs == 0 {
            return Err("timeout must be positive".into());
        }
        if self.concurrency == 0 {
            return Err("concurrency must be positive".into());
        }
        url::Url::parse(&self.endpoint_url).map_err(|e| format!("endpoint {}: {e}", self.endpoint_url))?;
        Ok(())
    }
}

/// Counting semaphore bounding requests in flight.
struct Limiter {
    max: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

struct Permit<'a>(&'a Limiter);

impl Limiter {
    fn new(max: usize) -> Self {
        Self { max: max.max(1), active: Mutex::new(0), freed: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().unwrap_or_else(|e| e.into_inner());
        while *active >= self.max {
            active = self.freed.wait(active).unwrap_or_else(|e| e.into_inner());
        }
        *active += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        let mut active = self.0.active.lock().unwrap_or_else(|e| e.into_inner());
        *active -= 1;
        self.0.freed.notify_one();
    }
}

enum Failure {
    Fatal(GatewayError),
    RateLimited,
    Timeout,
    Server(u16),
    Transport(String),
}

/// Client for a chat-completions endpoint. Sends only the model and one user message.
pub struct HttpGateway {
    config: LlmConfig,
    api_key: Option<String>,
    agent: ureq::Agent,
    limiter: Limiter,
}

impl HttpGateway {
    /// The key is read from the configured environment variable on each request.
    pub fn new(config: LlmConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(config.timeout_secs.max(1))).build();
        let limiter = Limiter::new(config.concurrency);
        Self { config, api_key: None, agent, limiter }
    }

    pub fn with_api_key(mut self, key: impl Into<String>) -> Self {
        self.api_key = Some(key.into());
        self
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    fn key(&self) -> Result<String, GatewayError> {
        match &self.api_key {
            Some(key) => Ok(key.clone()),
            None => std::env::var(&self.config.api_key_source)
                .ok()
                .filter(|k| !k.trim().is_empty())
                .ok_or_else(|| GatewayError::Auth(format!("environment variable {} is not set", self.config.api_key_source))),
        }
    }

    fn attempt(&self, key: &str, body: &Value) -> Result<(String, Option<String>), Failure> {
        let response = self
            .agent
            .post(&self.config.endpoint_url)
            .set("Authorization", &format!("Bearer {key}"))
            .send_json(body.clone());
        let response = match response {
            Ok(r) => r,
            Err(ureq::Error::Status(status, r)) => {
                let message = r.into_string().unwrap_or_default();
                return Err(match status {
                    401 | 403 => Failure::Fatal(GatewayError::Auth(format!("status {status}"))),
                    429 => Failure::RateLimited,
                    408 => Failure::Timeout,
                    s if s >= 500 => Failure::Server(s),
                    s => Failure::Fatal(GatewayError::Rejected { status: s, message }),
                });
            }
            Err(ureq::Error::Transport(t)) => {
                let message = t.to_string();
                return Err(if message.contains("timed out") || message.contains("timeout") {
                    Failure::Timeout
                } else {
                    Failure::Transport(message)
                });
            }
        };
        let value: Value = response
            .into_json()
            .map_err(|e| Failure::Fatal(GatewayError::MalformedResponse(e.to_string())))?;
        let text = value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .ok_or_else(|| Failure::Fatal(GatewayError::MalformedResponse("no choices[0].message.content".into())))?;
        let id = value.get("id").and_then(Value::as_str).map(str::to_string);
        Ok((text.to_string(), id))
    }
}

impl CompletionGateway for HttpGateway {
    fn complete(&self, prompt: &PromptSpec, model: &str) -> Result<CompletionResult, GatewayError> {
        let key = self.key()?;
        let body = json!({ "model": model, "messages": [{ "role": "user", "content": prompt.text }] });
        let _permit = self.limiter.acquire();
        let started = Instant::now();
        let mut attempts = 0;
        loop {
            attempts += 1;
            let failure = match self.attempt(&key, &body) {
                Ok((text, request_id)) => {
                    return Ok(CompletionResult {
                        text,
                        model_id: model.to_string(),
                        latency_ms: started.elapsed().as_millis() as u64,
                        request_id,
                    })
                }
                Err(Failure::Fatal(e)) => return Err(e),
                Err(f) => f,
            };
            if attempts > self.config.max_retries {
                return Err(match failure {
                    Failure::RateLimited => GatewayError::RateLimited { attempts },
                    Failure::Timeout => GatewayError::Timeout { attempts },
                    Failure::Server(status) => GatewayError::Server { status, attempts },
                    Failure::Transport(message) => GatewayError::Transport { message, attempts },
                    Failure::Fatal(e) => e,
                });
            }
            let delay = self.config.backoff_ms.saturating_mul(1 << (attempts - 1).min(16));
            tracing::debug!(attempts, delay, "retrying completion request");
            std::thread::sleep(Duration::from_millis(delay));
        }
    }
}
