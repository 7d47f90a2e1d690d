use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::CommandError;
use crate::distill::{LlmDistiller, StubDistiller};
use crate::index::{Embedder, HashingEmbedder, DEFAULT_DIMENSION, DEFAULT_NEAR_DUPLICATE_THRESHOLD};
use crate::provider::{ChatClient, ChatSettings, Prompts, DEFAULT_MAX_IN_FLIGHT};
use crate::purify::{PurificationConfig, Purifier};
use crate::qc::{LlmEvaluator, QcConfig, StubEvaluator};
use crate::retry::RetryPolicy;
use crate::selection::SelectionConfig;

/// Every tunable of the pipeline, read from one JSON document. Missing
/// sections and fields take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub selection: SelectionConfig,
    pub purification: PurificationConfig,
    pub qc: QcConfig,
    pub embedder: EmbedderConfig,
    pub dedup: DedupConfig,
    pub paths: PathsConfig,
    pub provider: ProviderConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmbedderConfig {
    /// Must name the bundled hashing embedder when set.
    pub id: Option<String>,
    pub dimension: usize,
}

impl Default for EmbedderConfig {
    fn default() -> Self {
        Self {
            id: None,
            dimension: DEFAULT_DIMENSION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DedupConfig {
    pub threshold: f64,
}

impl Default for DedupConfig {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_NEAR_DUPLICATE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    /// Defaults to `audit.jsonl` inside the output directory.
    pub audit_log: Option<PathBuf>,
}

/// Chat-completion provider settings. Endpoint, model and key fall back to
/// the `MEMGOV_LLM_*` environment variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
    pub retry: RetryPolicy,
    pub prompts_dir: Option<PathBuf>,
    pub transcript: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            endpoint: None,
            model: None,
            timeout_secs: 120,
            max_in_flight: DEFAULT_MAX_IN_FLIGHT,
            retry: RetryPolicy::default(),
            prompts_dir: None,
            transcript: None,
        }
    }
}

impl PipelineConfig {
    /// Reads and validates a config file; `None` gives the defaults.
    pub fn load(path: Option<&Path>) -> Result<Self, CommandError> {
        let cfg = match path {
            None => Self::default(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CommandError::Usage(format!("config {}: {e}", p.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CommandError::Usage(format!("config {}: {e}", p.display())))?
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CommandError> {
        let bad = |what: &str, e: &dyn std::fmt::Display| CommandError::Usage(format!("config {what}: {e}"));
        self.selection.validate().map_err(|e| bad("selection", &e))?;
        Purifier::new(self.purification.clone()).map_err(|e| bad("purification", &e))?;
        self.qc.validate().map_err(|e| bad("qc", &e))?;
        if self.embedder.dimension == 0 {
            return Err(bad("embedder", &"dimension must be positive"));
        }
        self.embedder()?;
        if !(0.0..=1.0).contains(&self.dedup.threshold) {
            return Err(bad("dedup", &format!("threshold must be within [0, 1], got {}", self.dedup.threshold)));
        }
        if self.provider.max_in_flight == 0 {
            return Err(bad("provider", &"max_in_flight must be at least 1"));
        }
        for p in [&self.paths.input, &self.paths.output_dir, &self.paths.audit_log]
            .into_iter()
            .flatten()
        {
            if p.as_os_str().is_empty() {
                return Err(bad("paths", &"paths must be non-empty"));
            }
        }
        Ok(())
    }

    pub fn embedder(&self) -> Result<HashingEmbedder, CommandError> {
        embedder_for(self.embedder.id.as_deref(), self.embedder.dimension)
    }

    pub fn purifier(&self) -> Result<Purifier, CommandError> {
        Purifier::new(self.purification.clone()).map_err(|e| CommandError::Usage(format!("config purification: {e}")))
    }

    /// Distiller and evaluator: rule-based stubs in fixture mode, otherwise
    /// the configured chat provider.
    pub fn stages(&self, fixture_mode: bool) -> Result<super::govern::Stages, CommandError> {
        if fixture_mode {
            return Ok((Arc::new(StubDistiller), Arc::new(StubEvaluator)));
        }
        let p = &self.provider;
        let mut settings = match (&p.endpoint, &p.model) {
            (Some(endpoint), Some(model)) => {
                let mut s = ChatSettings::new(endpoint, model);
                s.api_key = std::env::var(crate::provider::ENV_LLM_API_KEY).ok().filter(|k| !k.is_empty());
                s
            }
            _ => ChatSettings::from_env().map_err(|e| CommandError::Infra(format!("provider: {e}")))?,
        };
        if let Some(endpoint) = &p.endpoint {
            settings.endpoint = endpoint.clone();
        }
        if let Some(model) = &p.model {
            settings.model = model.clone();
        }
        settings.timeout = Duration::from_secs(p.timeout_secs);
        settings.retry = p.retry;
        settings.max_in_flight = p.max_in_flight;
        settings.transcript = p.transcript.clone();
        let prompts = Prompts::load(p.prompts_dir.as_deref()).map_err(|e| CommandError::Usage(format!("prompts: {e}")))?;
        let client = Arc::new(ChatClient::new(settings));
        Ok((
            Arc::new(LlmDistiller::new(client.clone(), prompts.clone())),
            Arc::new(LlmEvaluator::new(client, prompts)),
        ))
    }
}

/// The bundled embedder matching `id` (if given) at `dimension`.
pub fn embedder_for(id: Option<&str>, dimension: usize) -> Result<HashingEmbedder, CommandError> {
    if dimension == 0 {
        return Err(CommandError::Usage("embedder dimension must be positive".into()));
    }
    let e = HashingEmbedder::new(dimension);
    match id {
        Some(id) if id != e.id() => Err(CommandError::Usage(format!(
            "embedder `{id}` is not available; the bundled embedder at dimension {dimension} is `{}`",
            e.id()
        ))),
        _ => Ok(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_partial_documents() {
        let cfg: PipelineConfig = serde_json::from_str(r#"{"qc": {"gamma": 0.8}, "selection": {"top_m": 5}}"#).unwrap();
        assert_eq!(cfg.qc.gamma, 0.8);
        assert_eq!(cfg.qc.max_iterations, 3);
        assert_eq!(cfg.selection.top_m, 5);
        assert_eq!(cfg.purification.tau, 0.2);
        assert_eq!(cfg.embedder.dimension, 256);
        cfg.validate().unwrap();
        assert!(serde_json::from_str::<PipelineConfig>(r#"{"typo": 1}"#).is_err());
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        let mut cfg = PipelineConfig::default();
        cfg.purification.tau = 1.5;
        assert!(matches!(cfg.validate(), Err(CommandError::Usage(_))));
        let mut cfg = PipelineConfig::default();
        cfg.embedder.id = Some("some-remote-model".into());
        assert!(matches!(cfg.validate(), Err(CommandError::Usage(_))));
        let mut cfg = PipelineConfig::default();
        cfg.embedder.id = Some("feature-hash-fnv1a-v1-d256".into());
        cfg.validate().unwrap();
    }
}
