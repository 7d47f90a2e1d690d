//! Content purification of comment threads and card drafting.

mod condense;
pub mod llm;
pub mod stub;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::card::{CardSource, ExperienceCard, IndexLayer, ResolutionLayer};
use crate::purify::PurifiedInstance;
use crate::qc::Feedback;

pub use condense::{collapse_repeated_blocks, condense, purify_content, CondensedThread, is_repeat_marker};
pub use llm::LlmDistiller;
pub use stub::StubDistiller;

/// Card fields named by each QC dimension, used for feedback-scoped regeneration.
pub fn fields_for_dimension(dimension: &str) -> &'static [CardField] {
    use CardField::*;
    match dimension {
        "faithfulness-to-source" => &[ProblemSummary, Signals],
        "signal-quality" => &[Signals],
        "root-cause-evidence" => &[RootCause],
        "strategy-actionability" => &[FixStrategy],
        "digest-groundedness" => &[PatchDigest],
        "verification-concreteness" => &[Verification],
        other => match other.strip_prefix("schema:").and_then(CardField::from_name) {
            Some(f) => f.as_slice(),
            None => &[],
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CardField {
    ProblemSummary,
    Signals,
    RootCause,
    FixStrategy,
    PatchDigest,
    Verification,
}

impl CardField {
    pub const ALL: [CardField; 6] = [
        Self::ProblemSummary,
        Self::Signals,
        Self::RootCause,
        Self::FixStrategy,
        Self::PatchDigest,
        Self::Verification,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ProblemSummary => "problem_summary",
            Self::Signals => "signals",
            Self::RootCause => "root_cause",
            Self::FixStrategy => "fix_strategy",
            Self::PatchDigest => "patch_digest",
            Self::Verification => "verification",
        }
    }

    /// Accepts a bare field name or a violation path such as `signals[3]`.
    pub fn from_name(name: &str) -> Option<Self> {
        let base = name.split('[').next().unwrap_or(name);
        Self::ALL.into_iter().find(|f| f.name() == base)
    }

    fn as_slice(self) -> &'static [CardField] {
        match self {
            Self::ProblemSummary => &[Self::ProblemSummary],
            Self::Signals => &[Self::Signals],
            Self::RootCause => &[Self::RootCause],
            Self::FixStrategy => &[Self::FixStrategy],
            Self::PatchDigest => &[Self::PatchDigest],
            Self::Verification => &[Self::Verification],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistillerRequest {
    pub instance: PurifiedInstance,
    pub condensed: CondensedThread,
    /// Set on refine iterations after the first.
    pub feedback: Option<Vec<Feedback>>,
    /// The draft the feedback refers to; fields it does not name are kept.
    pub previous_draft: Option<ExperienceCard>,
}

impl DistillerRequest {
    pub fn first(instance: PurifiedInstance, condensed: CondensedThread) -> Self {
        Self {
            instance,
            condensed,
            feedback: None,
            previous_draft: None,
        }
    }

    /// Fields to regenerate: all of them on a first request, otherwise those
    /// named by the feedback.
    pub fn fields_to_regenerate(&self) -> Vec<CardField> {
        match (&self.feedback, &self.previous_draft) {
            (Some(feedback), Some(_)) => CardField::ALL
                .into_iter()
                .filter(|f| {
                    feedback
                        .iter()
                        .any(|fb| fields_for_dimension(&fb.dimension).contains(f))
                })
                .collect(),
            _ => CardField::ALL.to_vec(),
        }
    }
}

/// Card content as produced by a distiller, before identity is attached.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CardDraft {
    pub index: IndexLayer,
    pub resolution: ResolutionLayer,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistillError {
    #[error("provider failure: {message}")]
    Provider { message: String, retryable: bool },
    #[error("malformed provider output: {0}")]
    Malformed(String),
}

impl DistillError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::Provider { retryable: true, .. })
    }
}

/// Produces card drafts. Implementations must tolerate concurrent calls.
pub trait Distiller: Send + Sync {
    fn distill(&self, request: &DistillerRequest) -> Result<CardDraft, DistillError>;
}

/// Runs the distiller and attaches the card identity. Malformed output is
/// re-requested once before the error surfaces.
pub fn distill_card(
    request: &DistillerRequest,
    distiller: &dyn Distiller,
) -> Result<ExperienceCard, DistillError> {
    let draft = match distiller.distill(request) {
        Err(DistillError::Malformed(first)) => {
            tracing::debug!(error = %first, "malformed draft, asking once more");
            distiller.distill(request)?
        }
        other => other?,
    };
    let source: CardSource = request.instance.triplet.source();
    Ok(ExperienceCard {
        card_id: ExperienceCard::id_for_source(&source),
        source,
        index: draft.index,
        resolution: draft.resolution,
    })
}
