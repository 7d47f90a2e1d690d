//! Generic chat-completion provider and prompt templates.
//!
//! The endpoint is any service accepting an OpenAI-style
//! `{"model", "messages"}` body and returning `choices[0].message.content`.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex, OnceLock};
use std::time::Duration;

use regex::Regex;
use serde_json::{json, Value};
use thiserror::Error;
use ureq::Agent;

use crate::retry::RetryPolicy;

pub const ENV_LLM_ENDPOINT: &str = "MEMGOV_LLM_ENDPOINT";
pub const ENV_LLM_API_KEY: &str = "MEMGOV_LLM_API_KEY";
pub const ENV_LLM_MODEL: &str = "MEMGOV_LLM_MODEL";

pub const DEFAULT_MAX_IN_FLIGHT: usize = 8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProviderError {
    #[error("{0} is not set")]
    MissingEnv(&'static str),
    #[error("provider request failed: {message}")]
    Request { message: String, retryable: bool },
    #[error("malformed provider response: {0}")]
    Malformed(String),
}

impl ProviderError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::Request { retryable: true, .. })
    }
}

/// Counting semaphore bounding concurrent provider calls.
#[derive(Debug)]
pub struct InFlightLimit {
    available: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a>(&'a InFlightLimit);

impl InFlightLimit {
    pub fn new(limit: usize) -> Self {
        Self {
            available: Mutex::new(limit.max(1)),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut n = self.available.lock().unwrap_or_else(|e| e.into_inner());
        while *n == 0 {
            n = self.freed.wait(n).unwrap_or_else(|e| e.into_inner());
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.freed.notify_one();
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatSettings {
    pub endpoint: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout: Duration,
    pub retry: RetryPolicy,
    pub max_in_flight: usize,
    /// Optional JSON Lines log of every request and response.
    pub transcript: Option<PathBuf>,
}

impl ChatSettings {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            endpoint: endpoint.into(),
            api_key: None,
            model: model.into(),
            timeout: Duration::from_secs(120),
            retry: RetryPolicy::default(),
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            transcript: None,
        }
    }

    /// Reads `MEMGOV_LLM_ENDPOINT`, `MEMGOV_LLM_MODEL` and, if set,
    /// `MEMGOV_LLM_API_KEY`.
    pub fn from_env() -> Result<Self, ProviderError> {
        let endpoint =
            std::env::var(ENV_LLM_ENDPOINT).map_err(|_| ProviderError::MissingEnv(ENV_LLM_ENDPOINT))?;
        let model = std::env::var(ENV_LLM_MODEL).map_err(|_| ProviderError::MissingEnv(ENV_LLM_MODEL))?;
        let mut s = Self::new(endpoint, model);
        s.api_key = std::env::var(ENV_LLM_API_KEY).ok().filter(|k| !k.is_empty());
        Ok(s)
    }
}

pub struct ChatClient {
    agent: Agent,
    settings: ChatSettings,
    limit: InFlightLimit,
    transcript: Mutex<()>,
}

impl ChatClient {
    pub fn new(settings: ChatSettings) -> Self {
        let agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(settings.timeout))
            .build()
            .into();
        Self {
            agent,
            limit: InFlightLimit::new(settings.max_in_flight),
            settings,
            transcript: Mutex::new(()),
        }
    }

    pub fn settings(&self) -> &ChatSettings {
        &self.settings
    }

    /// Sends one system + user exchange and returns the assistant text.
    pub fn complete(&self, system: &str, user: &str) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.settings.model,
            "temperature": 0,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
        })
        .to_string();
        let _permit = self.limit.acquire();
        let reply = self
            .settings
            .retry
            .run(|| self.post(&body), ProviderError::is_retryable)?;
        self.log_exchange(&body, &reply);
        Ok(reply)
    }

    fn post(&self, body: &str) -> Result<String, ProviderError> {
        let url = &self.settings.endpoint;
        let mut req = self.agent.post(url).header("Content-Type", "application/json");
        if let Some(key) = &self.settings.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let retryable = |message: String| ProviderError::Request {
            message,
            retryable: true,
        };
        let mut resp = req.send(body).map_err(|e| retryable(format!("POST {url}: {e}")))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| retryable(format!("POST {url}: {e}")))?;
        match status {
            200..=299 => {}
            429 | 500..=599 => return Err(retryable(format!("POST {url}: HTTP {status}"))),
            _ => {
                return Err(ProviderError::Request {
                    message: format!("POST {url}: HTTP {status}: {}", text.chars().take(200).collect::<String>()),
                    retryable: false,
                })
            }
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| ProviderError::Malformed(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ProviderError::Malformed("missing choices[0].message.content".into()))
    }

    fn log_exchange(&self, request: &str, response: &str) {
        let Some(path) = &self.settings.transcript else { return };
        let _guard = self.transcript.lock().unwrap_or_else(|e| e.into_inner());
        let line = json!({"request": serde_json::from_str::<Value>(request).unwrap_or(Value::Null), "response": response});
        let written = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .and_then(|mut f| writeln!(f, "{line}"));
        if let Err(e) = written {
            tracing::warn!(path = %path.display(), error = %e, "could not write provider transcript");
        }
    }
}

fn placeholder() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\{\{\s*([A-Za-z_][A-Za-z0-9_]*)\s*\}\}").unwrap())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TemplateError {
    #[error("template has no value for `{{{{{0}}}}}`")]
    MissingField(String),
    #[error("reading template {path}: {message}")]
    Io { path: PathBuf, message: String },
}

/// Plain text with `{{field}}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub name: String,
    pub text: String,
}

impl PromptTemplate {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            text: text.into(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, TemplateError> {
        let text = std::fs::read_to_string(path).map_err(|e| TemplateError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("prompt");
        Ok(Self::new(name, text))
    }

    pub fn fields(&self) -> Vec<String> {
        placeholder()
            .captures_iter(&self.text)
            .map(|c| c[1].to_string())
            .collect()
    }

    /// Substitutes every placeholder; a placeholder without a value is an error.
    pub fn render(&self, values: &BTreeMap<&str, String>) -> Result<String, TemplateError> {
        if let Some(missing) = self.fields().into_iter().find(|f| !values.contains_key(f.as_str())) {
            return Err(TemplateError::MissingField(missing));
        }
        Ok(placeholder()
            .replace_all(&self.text, |c: &regex::Captures| values[&c[1]].clone())
            .into_owned())
    }
}

pub const DISTILL_PROMPT: &str = include_str!("../prompts/distill.txt");
pub const EVALUATE_PROMPT: &str = include_str!("../prompts/evaluate.txt");
pub const SYSTEM_PROMPT: &str = include_str!("../prompts/system.txt");

/// Prompt set keyed by pipeline stage. Files in an override directory
/// (`distill.txt`, `evaluate.txt`, `system.txt`) replace the built-ins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prompts {
    pub system: PromptTemplate,
    pub distill: PromptTemplate,
    pub evaluate: PromptTemplate,
}

impl Default for Prompts {
    fn default() -> Self {
        Self {
            system: PromptTemplate::new("system", SYSTEM_PROMPT),
            distill: PromptTemplate::new("distill", DISTILL_PROMPT),
            evaluate: PromptTemplate::new("evaluate", EVALUATE_PROMPT),
        }
    }
}

impl Prompts {
    pub fn load(dir: Option<&Path>) -> Result<Self, TemplateError> {
        let mut prompts = Self::default();
        let Some(dir) = dir else { return Ok(prompts) };
        for (name, slot) in [
            ("system", &mut prompts.system),
            ("distill", &mut prompts.distill),
            ("evaluate", &mut prompts.evaluate),
        ] {
            let path = dir.join(format!("{name}.txt"));
            if path.exists() {
                *slot = PromptTemplate::load(&path)?;
            }
        }
        Ok(prompts)
    }
}

/// The first balanced-looking JSON object in a model reply, tolerating code
/// fences and surrounding prose.
pub fn extract_json_object(reply: &str) -> Option<Value> {
    let start = reply.find('{')?;
    let end = reply.rfind('}')?;
    if end < start {
        return None;
    }
    serde_json::from_str(&reply[start..=end]).ok()
}
