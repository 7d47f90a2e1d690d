use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Deserialize;

use super::{CardDraft, CardField, DistillError, Distiller, DistillerRequest};
use crate::card::{IndexLayer, ResolutionLayer};
use crate::provider::{extract_json_object, ChatClient, ProviderError, Prompts};

/// Patch text beyond this many characters is cut from the prompt.
const MAX_PATCH_CHARS: usize = 24_000;

/// Distiller backed by a chat-completion provider.
pub struct LlmDistiller {
    client: Arc<ChatClient>,
    prompts: Prompts,
}

#[derive(Deserialize)]
struct Reply {
    problem_summary: String,
    signals: Vec<String>,
    root_cause: String,
    fix_strategy: String,
    patch_digest: String,
    verification: String,
}

impl From<ProviderError> for DistillError {
    fn from(e: ProviderError) -> Self {
        match e {
            ProviderError::Malformed(m) => DistillError::Malformed(m),
            other => DistillError::Provider {
                retryable: other.is_retryable(),
                message: other.to_string(),
            },
        }
    }
}

impl LlmDistiller {
    pub fn new(client: Arc<ChatClient>, prompts: Prompts) -> Self {
        Self { client, prompts }
    }

    pub fn render(&self, req: &DistillerRequest) -> Result<String, DistillError> {
        let c = &req.condensed;
        let inst = &req.instance;
        let mut patch: String = inst.triplet.patch_text.chars().take(MAX_PATCH_CHARS).collect();
        if patch.len() < inst.triplet.patch_text.len() {
            patch.push_str("\n[patch truncated]");
        }
        let comments = c
            .kept_comments
            .iter()
            .map(|cm| format!("[{:?}] {}", cm.author_role, cm.body))
            .collect::<Vec<_>>()
            .join("\n---\n");
        let anchors = inst
            .anchors
            .iter()
            .map(|a| a.excerpt.as_str())
            .collect::<Vec<_>>()
            .join("\n---\n");
        let feedback = match &req.feedback {
            Some(fb) if !fb.is_empty() => fb
                .iter()
                .map(|f| format!("- {}: {}", f.dimension, f.text))
                .collect::<Vec<_>>()
                .join("\n"),
            _ => "none".into(),
        };
        let previous = match &req.previous_draft {
            Some(card) => serde_json::to_string_pretty(&serde_json::json!({
                "index": card.index,
                "resolution": card.resolution,
            }))
            .unwrap_or_default(),
            None => "none".into(),
        };
        let regenerate = req
            .fields_to_regenerate()
            .iter()
            .map(|f| f.name())
            .collect::<Vec<_>>()
            .join(", ");

        let values: BTreeMap<&str, String> = [
            ("issue_title", c.issue_title.clone()),
            ("issue_body", c.issue_body.clone()),
            ("comments", if comments.is_empty() { "none".into() } else { comments }),
            ("anchors", anchors),
            ("diff_summary", c.diff_summary_lines.join("\n")),
            ("patch", patch),
            ("feedback", feedback),
            ("previous_draft", previous),
            ("regenerate", regenerate),
        ]
        .into_iter()
        .collect();
        self.prompts
            .distill
            .render(&values)
            .map_err(|e| DistillError::Provider {
                message: e.to_string(),
                retryable: false,
            })
    }
}

/// Parses a model reply into a draft. Fields the request did not ask to
/// regenerate are taken from the previous draft regardless of the reply.
pub fn parse_reply(reply: &str, req: &DistillerRequest) -> Result<CardDraft, DistillError> {
    let value = extract_json_object(reply).ok_or_else(|| DistillError::Malformed("no JSON object in reply".into()))?;
    let r: Reply = serde_json::from_value(value).map_err(|e| DistillError::Malformed(e.to_string()))?;
    let mut draft = CardDraft {
        index: IndexLayer {
            problem_summary: r.problem_summary,
            signals: r.signals,
        },
        resolution: ResolutionLayer {
            root_cause: r.root_cause,
            fix_strategy: r.fix_strategy,
            patch_digest: r.patch_digest,
            verification: r.verification,
        },
    };
    if let (Some(prev), Some(_)) = (&req.previous_draft, &req.feedback) {
        let regenerate = req.fields_to_regenerate();
        for field in CardField::ALL.into_iter().filter(|f| !regenerate.contains(f)) {
            match field {
                CardField::ProblemSummary => draft.index.problem_summary = prev.index.problem_summary.clone(),
                CardField::Signals => draft.index.signals = prev.index.signals.clone(),
                CardField::RootCause => draft.resolution.root_cause = prev.resolution.root_cause.clone(),
                CardField::FixStrategy => draft.resolution.fix_strategy = prev.resolution.fix_strategy.clone(),
                CardField::PatchDigest => draft.resolution.patch_digest = prev.resolution.patch_digest.clone(),
                CardField::Verification => draft.resolution.verification = prev.resolution.verification.clone(),
            }
        }
    }
    Ok(draft)
}

impl Distiller for LlmDistiller {
    fn distill(&self, req: &DistillerRequest) -> Result<CardDraft, DistillError> {
        let prompt = self.render(req)?;
        let reply = self.client.complete(&self.prompts.system.text, &prompt)?;
        parse_reply(&reply, req)
    }
}
