//! Checklist evaluation of card drafts and the bounded refine loop.

pub mod llm;
pub mod stub;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::card::{validate_schema, ExperienceCard, Violation};
use crate::distill::{distill_card, CondensedThread, DistillError, Distiller, DistillerRequest};
use crate::purify::PurifiedInstance;

pub use llm::LlmEvaluator;
pub use stub::StubEvaluator;

pub const DEFAULT_DIMENSIONS: [&str; 6] = [
    "faithfulness-to-source",
    "signal-quality",
    "root-cause-evidence",
    "strategy-actionability",
    "digest-groundedness",
    "verification-concreteness",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QcConfig {
    pub gamma: f64,
    pub max_iterations: u32,
    pub dimensions: Vec<String>,
    /// Dimensions scoring below this receive feedback.
    pub feedback_threshold: f64,
}

impl Default for QcConfig {
    fn default() -> Self {
        Self {
            gamma: 0.7,
            max_iterations: 3,
            dimensions: DEFAULT_DIMENSIONS.iter().map(|d| d.to_string()).collect(),
            feedback_threshold: 0.5,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum QcConfigError {
    #[error("gamma must be within [0, 1], got {0}")]
    Gamma(f64),
    #[error("feedback_threshold must be within [0, 1], got {0}")]
    FeedbackThreshold(f64),
    #[error("max_iterations must be at least 1")]
    MaxIterations,
    #[error("at least one dimension is required")]
    NoDimensions,
    #[error("dimension `{0}` is listed twice")]
    DuplicateDimension(String),
}

impl QcConfig {
    pub fn validate(&self) -> Result<(), QcConfigError> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(QcConfigError::Gamma(self.gamma));
        }
        if !(0.0..=1.0).contains(&self.feedback_threshold) {
            return Err(QcConfigError::FeedbackThreshold(self.feedback_threshold));
        }
        if self.max_iterations == 0 {
            return Err(QcConfigError::MaxIterations);
        }
        if self.dimensions.is_empty() {
            return Err(QcConfigError::NoDimensions);
        }
        for (i, d) in self.dimensions.iter().enumerate() {
            if self.dimensions[..i].contains(d) {
                return Err(QcConfigError::DuplicateDimension(d.clone()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feedback {
    pub dimension: String,
    pub text: String,
}

impl Feedback {
    pub fn new(dimension: impl Into<String>, text: impl Into<String>) -> Self {
        Self {
            dimension: dimension.into(),
            text: text.into(),
        }
    }

    /// Schema violations are fed back under a `schema:<field>` dimension.
    pub fn from_violation(v: &Violation) -> Self {
        Self::new(format!("schema:{}", v.field), v.reason.clone())
    }
}

/// One evaluator verdict for one dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionScore {
    pub dimension: String,
    pub score: f64,
    /// Advice used as feedback when the score is low.
    #[serde(default)]
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QcReport {
    pub per_dimension: BTreeMap<String, f64>,
    pub aggregate: f64,
    pub feedback: Vec<Feedback>,
    pub iteration: u32,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QcError {
    #[error("evaluator failure: {message}")]
    Provider { message: String, retryable: bool },
    #[error("malformed evaluator output: {0}")]
    Malformed(String),
    #[error(transparent)]
    Distill(#[from] DistillError),
}

/// Scores a card along the requested dimensions. Implementations must
/// tolerate concurrent calls.
pub trait Evaluator: Send + Sync {
    fn evaluate(
        &self,
        card: &ExperienceCard,
        instance: &PurifiedInstance,
        dimensions: &[String],
    ) -> Result<Vec<DimensionScore>, QcError>;
}

pub fn evaluate_card(
    card: &ExperienceCard,
    instance: &PurifiedInstance,
    evaluator: &dyn Evaluator,
    cfg: &QcConfig,
) -> Result<QcReport, QcError> {
    let scores = evaluator.evaluate(card, instance, &cfg.dimensions)?;
    let mut per_dimension = BTreeMap::new();
    let mut feedback = Vec::new();
    for dim in &cfg.dimensions {
        let verdict = scores
            .iter()
            .find(|s| &s.dimension == dim)
            .ok_or_else(|| QcError::Malformed(format!("no score for dimension `{dim}`")))?;
        if !(0.0..=1.0).contains(&verdict.score) {
            return Err(QcError::Malformed(format!(
                "score {} for `{dim}` outside [0, 1]",
                verdict.score
            )));
        }
        per_dimension.insert(dim.clone(), verdict.score);
        if verdict.score < cfg.feedback_threshold {
            let text = if verdict.note.trim().is_empty() {
                format!("`{dim}` scored {:.2}; revise the corresponding fields", verdict.score)
            } else {
                verdict.note.clone()
            };
            feedback.push(Feedback::new(dim.clone(), text));
        }
    }
    let aggregate = per_dimension.values().sum::<f64>() / per_dimension.len() as f64;
    Ok(QcReport {
        per_dimension,
        aggregate,
        feedback,
        iteration: 1,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum RefineOutcome {
    Accepted {
        card: ExperienceCard,
        report: QcReport,
    },
    Rejected {
        report: QcReport,
        last_draft: ExperienceCard,
        violations: Vec<Violation>,
    },
}

impl RefineOutcome {
    pub fn report(&self) -> &QcReport {
        match self {
            Self::Accepted { report, .. } | Self::Rejected { report, .. } => report,
        }
    }
}

/// Distill, validate, evaluate; on failure, feed the report's feedback and any
/// schema violations into the next draft. At most `max_iterations` rounds.
///
/// Provider errors end the loop with an error; retrying them is the
/// provider's job and does not count as an iteration.
pub fn refine_loop(
    instance: &PurifiedInstance,
    condensed: &CondensedThread,
    distiller: &dyn Distiller,
    evaluator: &dyn Evaluator,
    cfg: &QcConfig,
) -> Result<RefineOutcome, QcError> {
    let mut request = DistillerRequest::first(instance.clone(), condensed.clone());
    let mut iteration = 1;
    loop {
        let card = distill_card(&request, distiller)?;
        let violations = validate_schema(&card);
        let mut report = evaluate_card(&card, instance, evaluator, cfg)?;
        report.iteration = iteration;
        tracing::debug!(card = %card.card_id, iteration, aggregate = report.aggregate, violations = violations.len(), "qc round");

        if violations.is_empty() && report.aggregate >= cfg.gamma {
            return Ok(RefineOutcome::Accepted { card, report });
        }
        if iteration >= cfg.max_iterations {
            return Ok(RefineOutcome::Rejected {
                report,
                last_draft: card,
                violations,
            });
        }
        let mut feedback = report.feedback.clone();
        feedback.extend(violations.iter().map(Feedback::from_violation));
        request.feedback = Some(feedback);
        request.previous_draft = Some(card);
        iteration += 1;
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use super::*;
    use crate::distill::tests::request;
    use crate::distill::{CardDraft, StubDistiller};

    /// Scores every dimension `fail` until call `pass_on`, then `pass`.
    struct Scripted {
        calls: Mutex<u32>,
        pass_on: u32,
    }

    impl Evaluator for Scripted {
        fn evaluate(&self, _: &ExperienceCard, _: &PurifiedInstance, dims: &[String]) -> Result<Vec<DimensionScore>, QcError> {
            let mut calls = self.calls.lock().unwrap();
            *calls += 1;
            let score = if *calls >= self.pass_on { 0.9 } else { 0.2 };
            Ok(dims
                .iter()
                .map(|d| DimensionScore {
                    dimension: d.clone(),
                    score,
                    note: format!("round {} note for {d}", *calls),
                })
                .collect())
        }
    }

    struct Recording(Mutex<Vec<DistillerRequest>>);

    impl Distiller for Recording {
        fn distill(&self, req: &DistillerRequest) -> Result<CardDraft, DistillError> {
            self.0.lock().unwrap().push(req.clone());
            StubDistiller.distill(req)
        }
    }

    fn run(pass_on: u32) -> (RefineOutcome, Vec<DistillerRequest>) {
        let req = request();
        let distiller = Recording(Mutex::new(Vec::new()));
        let evaluator = Scripted {
            calls: Mutex::new(0),
            pass_on,
        };
        let out = refine_loop(&req.instance, &req.condensed, &distiller, &evaluator, &QcConfig::default()).unwrap();
        (out, distiller.0.into_inner().unwrap())
    }

    #[test]
    fn accepts_on_the_passing_iteration() {
        for n in 1..=3 {
            let (out, requests) = run(n);
            let RefineOutcome::Accepted { report, .. } = &out else { panic!("{out:?}") };
            assert_eq!(report.iteration, n);
            assert_eq!(requests.len() as u32, n);
            assert!(requests[0].feedback.is_none());
            if n > 1 {
                let fb = requests[n as usize - 1].feedback.as_ref().unwrap();
                assert_eq!(fb.len(), 6);
                assert!(fb[0].text.starts_with(&format!("round {} note", n - 1)));
            }
        }
    }

    #[test]
    fn always_failing_rejects_after_three() {
        let (out, requests) = run(u32::MAX);
        let RefineOutcome::Rejected { report, .. } = &out else { panic!() };
        assert_eq!(report.iteration, 3);
        assert_eq!(requests.len(), 3);
    }

    #[test]
    fn mean_aggregate_and_feedback_threshold() {
        struct Fixed(Vec<f64>);
        impl Evaluator for Fixed {
            fn evaluate(&self, _: &ExperienceCard, _: &PurifiedInstance, dims: &[String]) -> Result<Vec<DimensionScore>, QcError> {
                Ok(dims
                    .iter()
                    .zip(&self.0)
                    .map(|(d, s)| DimensionScore { dimension: d.clone(), score: *s, note: String::new() })
                    .collect())
            }
        }
        let req = request();
        let card = distill_card(&req, &StubDistiller).unwrap();
        let cfg = QcConfig::default();
        let r = evaluate_card(&card, &req.instance, &Fixed(vec![0.8; 6]), &cfg).unwrap();
        assert!((r.aggregate - 0.8).abs() < 1e-12);
        assert!(r.feedback.is_empty());
        let r = evaluate_card(&card, &req.instance, &Fixed(vec![0.5, 0.49, 1.0, 0.0, 1.0, 1.0]), &cfg).unwrap();
        let dims: Vec<_> = r.feedback.iter().map(|f| f.dimension.as_str()).collect();
        assert_eq!(dims, ["signal-quality", "strategy-actionability"]);
        assert!(matches!(
            evaluate_card(&card, &req.instance, &Fixed(vec![1.2; 6]), &cfg),
            Err(QcError::Malformed(_))
        ));
        assert!(matches!(
            evaluate_card(&card, &req.instance, &Fixed(vec![1.0; 5]), &cfg),
            Err(QcError::Malformed(_))
        ));
    }

    #[test]
    fn provider_errors_propagate() {
        struct Down;
        impl Evaluator for Down {
            fn evaluate(&self, _: &ExperienceCard, _: &PurifiedInstance, _: &[String]) -> Result<Vec<DimensionScore>, QcError> {
                Err(QcError::Provider { message: "503".into(), retryable: true })
            }
        }
        let req = request();
        let err = refine_loop(&req.instance, &req.condensed, &StubDistiller, &Down, &QcConfig::default()).unwrap_err();
        assert!(matches!(err, QcError::Provider { .. }));
    }

    #[test]
    fn config_validation() {
        assert!(QcConfig::default().validate().is_ok());
        let bad = QcConfig { max_iterations: 0, ..Default::default() };
        assert_eq!(bad.validate(), Err(QcConfigError::MaxIterations));
        let bad = QcConfig { gamma: -0.1, ..Default::default() };
        assert_eq!(bad.validate(), Err(QcConfigError::Gamma(-0.1)));
    }
}
