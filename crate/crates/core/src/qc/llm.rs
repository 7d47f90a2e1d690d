use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use super::{DimensionScore, Evaluator, QcError};
use crate::card::ExperienceCard;
use crate::provider::{extract_json_object, ChatClient, ProviderError, Prompts};
use crate::purify::PurifiedInstance;

/// Evaluator backed by a chat-completion provider.
pub struct LlmEvaluator {
    client: Arc<ChatClient>,
    prompts: Prompts,
}

#[derive(Deserialize)]
struct Reply {
    scores: Vec<DimensionScore>,
}

impl From<ProviderError> for QcError {
    fn from(e: ProviderError) -> Self {
        match e {
            ProviderError::Malformed(m) => QcError::Malformed(m),
            other => QcError::Provider {
                retryable: other.is_retryable(),
                message: other.to_string(),
            },
        }
    }
}

impl LlmEvaluator {
    pub fn new(client: Arc<ChatClient>, prompts: Prompts) -> Self {
        Self { client, prompts }
    }

    pub fn render(&self, card: &ExperienceCard, inst: &PurifiedInstance, dimensions: &[String]) -> Result<String, QcError> {
        let diff_summary = inst
            .diff
            .files
            .iter()
            .map(|f| format!("{}: +{} -{}", f.path(), f.added(), f.removed()))
            .collect::<Vec<_>>()
            .join("\n");
        let values: BTreeMap<&str, String> = [
            ("card", serde_json::to_string_pretty(card).unwrap_or_default()),
            ("issue_title", inst.triplet.issue.title.clone()),
            ("issue_body", inst.triplet.issue.body.clone()),
            ("diff_summary", diff_summary),
            (
                "dimensions",
                dimensions.iter().map(|d| format!("- {d}")).collect::<Vec<_>>().join("\n"),
            ),
        ]
        .into_iter()
        .collect();
        self.prompts.evaluate.render(&values).map_err(|e| QcError::Provider {
            message: e.to_string(),
            retryable: false,
        })
    }
}

impl Evaluator for LlmEvaluator {
    fn evaluate(
        &self,
        card: &ExperienceCard,
        instance: &PurifiedInstance,
        dimensions: &[String],
    ) -> Result<Vec<DimensionScore>, QcError> {
        let prompt = self.render(card, instance, dimensions)?;
        let reply = self.client.complete(&self.prompts.system.text, &prompt)?;
        let value = extract_json_object(&reply).ok_or_else(|| QcError::Malformed("no JSON object in reply".into()))?;
        let parsed: Reply = serde_json::from_value(value).map_err(|e| QcError::Malformed(e.to_string()))?;
        Ok(parsed.scores)
    }
}
