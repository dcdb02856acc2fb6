use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{prompt_hash, CompletionGateway, CompletionResult, GatewayError};
use crate::prompt::PromptSpec;

/// One line of an audit log.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AuditRecord {
    pub timestamp: String,
    pub model: String,
    pub prompt_hash: String,
    pub prompt: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response: Option<String>,
    /// Milliseconds.
    pub latency: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Writes every request and its outcome as one JSON line, then passes the outcome on.
pub struct AuditingGateway<G> {
    inner: G,
    sink: Mutex<Box<dyn Write + Send>>,
}

impl<G: CompletionGateway> AuditingGateway<G> {
    pub fn new(inner: G, sink: Box<dyn Write + Send>) -> Self {
        Self { inner, sink: Mutex::new(sink) }
    }

    /// Appends to `path`, creating it if needed.
    pub fn to_file(inner: G, path: &Path) -> Result<Self, GatewayError> {
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| GatewayError::Audit(format!("{}: {e}", path.display())))?;
        Ok(Self::new(inner, Box::new(file)))
    }

    pub fn inner(&self) -> &G {
        &self.inner
    }

    fn write(&self, record: &AuditRecord) -> Result<(), GatewayError> {
        let mut line = serde_json::to_string(record).map_err(|e| GatewayError::Audit(e.to_string()))?;
        line.push('\n');
        let mut sink = self.sink.lock().unwrap_or_else(|e| e.into_inner());
        sink.write_all(line.as_bytes()).and_then(|_| sink.flush()).map_err(|e| GatewayError::Audit(e.to_string()))
    }
}

impl<G: CompletionGateway> CompletionGateway for AuditingGateway<G> {
    fn complete(&self, prompt: &PromptSpec, model: &str) -> Result<CompletionResult, GatewayError> {
        let outcome = self.inner.complete(prompt, model);
        let mut record = AuditRecord {
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            model: model.to_string(),
            prompt_hash: prompt_hash(&prompt.text),
            prompt: prompt.text.clone(),
            response: None,
            latency: 0,
            request_id: None,
            error: None,
        };
        match &outcome {
            Ok(result) => {
                record.response = Some(result.text.clone());
                record.latency = result.latency_ms;
                record.request_id = result.request_id.clone();
                record.model = result.model_id.clone();
            }
            Err(e) => record.error = Some(e.to_string()),
        }
        self.write(&record)?;
        outcome
    }
}

/// Answers from a previous run's audit log. Repeated prompts are answered in the
/// order they were recorded; once exhausted the last answer repeats.
pub struct ReplayGateway {
    recorded: HashMap<(String, String), Vec<CompletionResult>>,
    cursors: Mutex<HashMap<(String, String), usize>>,
}

impl ReplayGateway {
    pub fn from_records(records: impl IntoIterator<Item = AuditRecord>) -> Self {
        let mut recorded: HashMap<(String, String), Vec<CompletionResult>> = HashMap::new();
        for r in records {
            if let Some(text) = r.response {
                recorded.entry((r.model.clone(), r.prompt_hash)).or_default().push(CompletionResult {
                    text,
                    model_id: r.model,
                    latency_ms: r.latency,
                    request_id: r.request_id,
                });
            }
        }
        Self { recorded, cursors: Mutex::new(HashMap::new()) }
    }

    pub fn from_file(path: &Path) -> Result<Self, GatewayError> {
        let file = std::fs::File::open(path).map_err(|e| GatewayError::Audit(format!("{}: {e}", path.display())))?;
        let mut records = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| GatewayError::Audit(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            records.push(
                serde_json::from_str(&line)
                    .map_err(|e| GatewayError::Audit(format!("{} line {}: {e}", path.display(), n + 1)))?,
            );
        }
        Ok(Self::from_records(records))
    }

    pub fn len(&self) -> usize {
        self.recorded.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.recorded.is_empty()
    }
}

impl CompletionGateway for ReplayGateway {
    fn complete(&self, prompt: &PromptSpec, model: &str) -> Result<CompletionResult, GatewayError> {
        let key = (model.to_string(), prompt_hash(&prompt.text));
        let answers = self.recorded.get(&key).ok_or_else(|| GatewayError::NotRecorded(key.1.clone()))?;
        let mut cursors = self.cursors.lock().unwrap_or_else(|e| e.into_inner());
        let cursor = cursors.entry(key).or_insert(0);
        let answer = answers[(*cursor).min(answers.len() - 1)].clone();
        *cursor += 1;
        Ok(answer)
    }
}
