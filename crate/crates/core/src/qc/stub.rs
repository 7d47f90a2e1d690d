//! Deterministic rule-based evaluator.
//!
//! | dimension | score |
//! |---|---|
//! | faithfulness-to-source | fraction of signals whose words all occur in the issue text |
//! | signal-quality | fraction of signals with a word of 4+ letters; 0 outside the count band |
//! | root-cause-evidence | half for citing anchor evidence, half for naming a changed file |
//! | strategy-actionability | thirds: names a changed file, uses an edit verb, quotes code |
//! | digest-groundedness | fraction of `AREA:` paths present in the diff |
//! | verification-concreteness | 1 for naming a changed file, 0.5 for a generic test step |

use std::collections::HashSet;

use super::{DimensionScore, Evaluator, QcError};
use crate::card::{parse_patch_digest, ExperienceCard, MAX_SIGNALS, MIN_SIGNALS};
use crate::distill::stub::{anchor_tokens, word_tokens};
use crate::purify::PurifiedInstance;

const EDIT_VERBS: &[&str] = &[
    "add", "remove", "replace", "guard", "check", "handle", "return", "validate", "modify",
    "change", "update", "rename", "move", "wrap", "catch", "skip", "initialize", "reset",
];

const TEST_WORDS: &[&str] = &["test", "tests", "reproduce", "run", "assert", "verify", "regression"];

#[derive(Debug, Clone, Copy, Default)]
pub struct StubEvaluator;

fn issue_words(inst: &PurifiedInstance) -> HashSet<String> {
    let issue = &inst.triplet.issue;
    std::iter::once(issue.title.as_str())
        .chain(std::iter::once(issue.body.as_str()))
        .chain(issue.comments.iter().map(|c| c.body.as_str()))
        .flat_map(word_tokens)
        .collect()
}

fn changed_paths(inst: &PurifiedInstance) -> Vec<&str> {
    inst.diff.paths().collect()
}

fn fraction(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

fn faithfulness(card: &ExperienceCard, inst: &PurifiedInstance) -> (f64, String) {
    let words = issue_words(inst);
    let signals = &card.index.signals;
    let missing: Vec<&str> = signals
        .iter()
        .filter(|s| {
            let toks = word_tokens(s);
            toks.is_empty() || !toks.iter().all(|t| words.contains(t))
        })
        .map(String::as_str)
        .collect();
    let note = format!(
        "{} of {} signals do not occur in the issue text ({}); take signals from the issue only",
        missing.len(),
        signals.len(),
        missing.join(", ")
    );
    (fraction(signals.len() - missing.len(), signals.len()), note)
}

fn signal_quality(card: &ExperienceCard) -> (f64, String) {
    let signals = &card.index.signals;
    if !(MIN_SIGNALS..=MAX_SIGNALS).contains(&signals.len()) {
        return (
            0.0,
            format!("provide {MIN_SIGNALS} to {MAX_SIGNALS} signals, not {}", signals.len()),
        );
    }
    let specific = signals
        .iter()
        .filter(|s| word_tokens(s).iter().any(|t| t.chars().filter(|c| c.is_alphabetic()).count() >= 4))
        .count();
    (
        fraction(specific, signals.len()),
        "replace short or generic signals with specific error names and symptoms".into(),
    )
}

fn mentions_path(text: &str, paths: &[&str]) -> bool {
    paths.iter().any(|p| {
        let name = p.rsplit('/').next().unwrap_or(p);
        text.contains(p) || (!name.is_empty() && text.contains(name))
    })
}

fn root_cause_evidence(card: &ExperienceCard, inst: &PurifiedInstance) -> (f64, String) {
    let text = &card.resolution.root_cause;
    let words: HashSet<String> = word_tokens(text).into_iter().collect();
    let evidence = anchor_tokens(inst).iter().any(|t| words.contains(t));
    let located = mentions_path(text, &changed_paths(inst));
    let score = 0.5 * f64::from(u8::from(evidence)) + 0.5 * f64::from(u8::from(located));
    (score, "cite the diagnostic evidence and the file where the defect lives".into())
}

fn strategy_actionability(card: &ExperienceCard, inst: &PurifiedInstance) -> (f64, String) {
    let text = &card.resolution.fix_strategy;
    let words = word_tokens(text);
    let checks = [
        mentions_path(text, &changed_paths(inst)),
        words.iter().any(|w| EDIT_VERBS.iter().any(|v| w.starts_with(v))),
        text.contains('`'),
    ];
    let hits = checks.iter().filter(|c| **c).count();
    (fraction(hits, checks.len()), "state concrete edits to named files with a code example".into())
}

fn digest_groundedness(card: &ExperienceCard, inst: &PurifiedInstance) -> (f64, String) {
    let paths = changed_paths(inst);
    let areas = parse_patch_digest(&card.resolution.patch_digest).areas;
    let grounded = areas
        .iter()
        .filter(|a| {
            let first = a.split_whitespace().next().unwrap_or("");
            let first = first.trim_matches('`');
            paths.contains(&first)
        })
        .count();
    (
        fraction(grounded, areas.len()),
        "AREA: lines must name files changed by the diff".into(),
    )
}

fn verification_concreteness(card: &ExperienceCard, inst: &PurifiedInstance) -> (f64, String) {
    let text = &card.resolution.verification;
    let score = if mentions_path(text, &changed_paths(inst)) {
        1.0
    } else if word_tokens(text).iter().any(|w| TEST_WORDS.contains(&w.as_str())) {
        0.5
    } else {
        0.0
    };
    (score, "name the tests or reproduction steps that confirm the fix".into())
}

impl StubEvaluator {
    pub fn score(&self, dimension: &str, card: &ExperienceCard, inst: &PurifiedInstance) -> Option<(f64, String)> {
        Some(match dimension {
            "faithfulness-to-source" => faithfulness(card, inst),
            "signal-quality" => signal_quality(card),
            "root-cause-evidence" => root_cause_evidence(card, inst),
            "strategy-actionability" => strategy_actionability(card, inst),
            "digest-groundedness" => digest_groundedness(card, inst),
            "verification-concreteness" => verification_concreteness(card, inst),
            _ => return None,
        })
    }
}

impl Evaluator for StubEvaluator {
    fn evaluate(
        &self,
        card: &ExperienceCard,
        instance: &PurifiedInstance,
        dimensions: &[String],
    ) -> Result<Vec<DimensionScore>, QcError> {
        dimensions
            .iter()
            .map(|d| {
                let (score, note) = self
                    .score(d, card, instance)
                    .ok_or_else(|| QcError::Malformed(format!("stub evaluator has no rule for `{d}`")))?;
                Ok(DimensionScore {
                    dimension: d.clone(),
                    score,
                    note,
                })
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distill::tests::request;
    use crate::distill::{distill_card, StubDistiller};
    use crate::qc::{evaluate_card, refine_loop, QcConfig, RefineOutcome};

    fn card() -> ExperienceCard {
        distill_card(&request(), &StubDistiller).unwrap()
    }

    #[test]
    fn faithful_signals_score_one() {
        let req = request();
        let mut c = card();
        c.index.signals = ["crash", "empty", "input", "parse", "indexerror", "string", "index", "range", "cli", "calling"]
            .map(String::from)
            .to_vec();
        assert_eq!(StubEvaluator.score("faithfulness-to-source", &c, &req.instance).unwrap().0, 1.0);
    }

    #[test]
    fn ungrounded_digest_scores_zero() {
        let req = request();
        let mut c = card();
        c.resolution.patch_digest = "AREA: elsewhere.c\nCHUNK: a\nCHUNK: b\nCHUNK: c".into();
        assert_eq!(StubEvaluator.score("digest-groundedness", &c, &req.instance).unwrap().0, 0.0);
    }

    #[test]
    fn stub_cards_pass_first_time() {
        let req = request();
        let report = evaluate_card(&card(), &req.instance, &StubEvaluator, &QcConfig::default()).unwrap();
        assert!(report.aggregate >= 0.7, "{report:?}");
        let out = refine_loop(&req.instance, &req.condensed, &StubDistiller, &StubEvaluator, &QcConfig::default()).unwrap();
        assert!(matches!(out, RefineOutcome::Accepted { ref report, .. } if report.iteration == 1));
    }

    #[test]
    fn unknown_dimension_is_malformed() {
        let req = request();
        let cfg = QcConfig {
            dimensions: vec!["novelty".into()],
            ..Default::default()
        };
        assert!(evaluate_card(&card(), &req.instance, &StubEvaluator, &cfg).is_err());
    }
}
