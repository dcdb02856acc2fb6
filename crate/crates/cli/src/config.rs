//! Service configuration: a TOML file with `EXPLAIN_*` environment overrides.

use std::path::{Path, PathBuf};

use explain_core::gateway::LlmConfig;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", default, deny_unknown_fields)]
pub struct Config {
    pub bind: String,
    pub store_path: PathBuf,
    pub template_dir: Option<PathBuf>,
    /// Example outputs in the corpus layout; the built-in pool is used when unset.
    pub examples_path: Option<PathBuf>,
    /// Answer completions offline instead of calling the LLM endpoint.
    pub mock: bool,
    pub mock_table: Option<PathBuf>,
    pub audit_log: Option<PathBuf>,
    /// Directory of static files served under `/ui`.
    pub ui_dir: Option<PathBuf>,
    /// Origins allowed by CORS; `*` allows any.
    pub cors_origins: Vec<String>,
    pub llm: LlmConfig,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8080".into(),
            store_path: PathBuf::from("explain-store.ndjson"),
            template_dir: None,
            examples_path: None,
            mock: false,
            mock_table: None,
            audit_log: None,
            ui_dir: None,
            cors_origins: vec!["http://localhost:5173".into()],
            llm: LlmConfig::default(),
        }
    }
}

impl Config {
    /// Reads `path` if given, then applies environment overrides.
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?;
                toml::from_str(&text).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))?
            }
            None => Config::default(),
        };
        config.apply_env(|k| std::env::var(k).ok())?;
        Ok(config)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) -> anyhow::Result<()> {
        let path = |v: String| Some(PathBuf::from(v));
        if let Some(v) = var("EXPLAIN_BIND") {
            self.bind = v;
        }
        if let Some(v) = var("EXPLAIN_STORE") {
            self.store_path = PathBuf::from(v);
        }
        if let Some(v) = var("EXPLAIN_TEMPLATES") {
            self.template_dir = path(v);
        }
        if let Some(v) = var("EXPLAIN_EXAMPLES") {
            self.examples_path = path(v);
        }
        if let Some(v) = var("EXPLAIN_MOCK") {
            self.mock = matches!(v.to_ascii_lowercase().as_str(), "1" | "true" | "yes" | "on");
        }
        if let Some(v) = var("EXPLAIN_MOCK_TABLE") {
            self.mock_table = path(v);
        }
        if let Some(v) = var("EXPLAIN_AUDIT_LOG") {
            self.audit_log = path(v);
        }
        if let Some(v) = var("EXPLAIN_UI_DIR") {
            self.ui_dir = path(v);
        }
        if let Some(v) = var("EXPLAIN_CORS_ORIGINS") {
            self.cors_origins = v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
        }
        if let Some(v) = var("EXPLAIN_LLM_ENDPOINT") {
            self.llm.endpoint_url = v;
        }
        if let Some(v) = var("EXPLAIN_LLM_MODEL") {
            self.llm.model_id = v;
        }
        if let Some(v) = var("EXPLAIN_LLM_KEY_VAR") {
            self.llm.api_key_source = v;
        }
        if let Some(v) = var("EXPLAIN_LLM_CONCURRENCY") {
            self.llm.concurrency = v.parse().map_err(|e| anyhow::anyhow!("EXPLAIN_LLM_CONCURRENCY: {e}"))?;
        }
        self.llm.validate().map_err(anyhow::Error::msg)
    }
}
