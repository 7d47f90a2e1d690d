//! Instance purification: keeps only closed-loop repair records.
//!
//! A triplet is accepted when, checked in this order,
//! 1. the PR is merged and explicitly references the issue,
//! 2. its patch parses as a unified diff,
//! 3. the issue thread carries at least one diagnostic anchor,
//! 4. the technical-content ratio of the comment thread is at least `tau`.
//!
//! The first failing check is the reported rejection reason.

pub mod anchors;
pub mod classify;
pub mod diff;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::RawTriplet;

pub use anchors::{detect_anchors, Anchor, AnchorSource};
pub use classify::{
    technical_content_ratio, technical_content_ratio_by_chars, CommentClassifier, RuleClassifier,
};
pub use diff::{parse_unified_diff, render_unified_diff, Diff, DiffError};

pub const DEFAULT_TAU: f64 = 0.2;

pub const DEFAULT_ANCHOR_PATTERNS: &[&str] = &[
    // Python traceback header plus its indented frames and the final exception line.
    r"Traceback \(most recent call last\):?(?:\r?\n[ \t]+[^\n]*)*(?:\r?\n[A-Za-z_][\w.]*(?:Error|Exception|Exit|Interrupt|Warning)\b[^\n]*)?",
    // Python, JVM/JS, gdb and Go frame lines.
    r#"(?m)^[ \t]*File "[^"\n]+", line \d+[^\n]*$"#,
    r"(?m)^[ \t]*at [\w$.<>/\[\]]+ ?\([^)\n]*\)[ \t]*$",
    r"(?m)^[ \t]*#\d+\s+0x[0-9a-fA-F]+ in [^\n]*$",
    r"(?m)^[ \t]*[\w./-]+\.go:\d+ \+0x[0-9a-f]+[ \t]*$",
    r"(?m)^[^\n]*\bpanicked at\b[^\n]*$",
    // Exception and error class names.
    r"(?m)^[^\n]*\b\w+(?:Error|Exception)\b[^\n]*$",
    // Assertion failures.
    r"(?mi)^[^\n]*\bassert(?:ion)?\b[^\n]*\bfail(?:ed|ure|s)?\b[^\n]*$",
    r"(?mi)^[^\n]*\b(?:segmentation fault|SIGSEGV|SIGABRT|core dumped)\b[^\n]*$",
];

pub const DEFAULT_LEXICON: &[&str] = &[
    "error",
    "stack",
    "patch",
    "regression",
    "reproduce",
    "traceback",
    "assert",
    "segfault",
    "null",
    "exception",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PurificationConfig {
    pub tau: f64,
    pub anchor_patterns: Vec<String>,
    pub technical_lexicon: Vec<String>,
    /// Distinct lexicon terms that alone make a comment technical.
    pub min_lexicon_terms: usize,
    /// Weight the ratio by comment length instead of counting comments.
    pub char_weighted: bool,
}

impl Default for PurificationConfig {
    fn default() -> Self {
        Self {
            tau: DEFAULT_TAU,
            anchor_patterns: DEFAULT_ANCHOR_PATTERNS.iter().map(|s| s.to_string()).collect(),
            technical_lexicon: DEFAULT_LEXICON.iter().map(|s| s.to_string()).collect(),
            min_lexicon_terms: 2,
            char_weighted: false,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum PurifyConfigError {
    #[error("tau must be within [0, 1], got {0}")]
    Tau(f64),
    #[error("anchor pattern {index} does not compile: {message}")]
    Pattern { index: usize, message: String },
    #[error("min_lexicon_terms must be at least 1")]
    LexiconTerms,
}

/// Compiled purification settings, built once at startup.
#[derive(Clone)]
pub struct Purifier {
    config: PurificationConfig,
    anchor_patterns: Arc<Vec<regex::Regex>>,
    classifier: Arc<dyn CommentClassifier>,
}

impl fmt::Debug for Purifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Purifier").field("config", &self.config).finish_non_exhaustive()
    }
}

impl Purifier {
    pub fn new(config: PurificationConfig) -> Result<Self, PurifyConfigError> {
        if !(0.0..=1.0).contains(&config.tau) {
            return Err(PurifyConfigError::Tau(config.tau));
        }
        if config.min_lexicon_terms == 0 {
            return Err(PurifyConfigError::LexiconTerms);
        }
        let anchor_patterns = config
            .anchor_patterns
            .iter()
            .enumerate()
            .map(|(index, p)| {
                regex::Regex::new(p).map_err(|e| PurifyConfigError::Pattern {
                    index,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let anchor_patterns = Arc::new(anchor_patterns);
        let classifier = Arc::new(RuleClassifier::new(
            anchor_patterns.clone(),
            config.technical_lexicon.clone(),
            config.min_lexicon_terms,
        ));
        Ok(Self {
            config,
            anchor_patterns,
            classifier,
        })
    }

    /// Replaces the rule-based classifier, e.g. with a model-backed one.
    pub fn with_classifier(mut self, classifier: Arc<dyn CommentClassifier>) -> Self {
        self.classifier = classifier;
        self
    }

    pub fn config(&self) -> &PurificationConfig {
        &self.config
    }

    pub fn classifier(&self) -> &dyn CommentClassifier {
        self.classifier.as_ref()
    }

    pub fn anchor_patterns(&self) -> &[regex::Regex] {
        &self.anchor_patterns
    }

    pub fn ratio(&self, triplet: &RawTriplet) -> f64 {
        let comments: Vec<_> = triplet.thread().collect();
        if self.config.char_weighted {
            technical_content_ratio_by_chars(&comments, self.classifier())
        } else {
            technical_content_ratio(&comments, self.classifier())
        }
    }

    pub fn purify(&self, triplet: RawTriplet) -> Purification {
        purify(triplet, self)
    }
}

impl Default for Purifier {
    fn default() -> Self {
        Self::new(PurificationConfig::default()).expect("default purification config is valid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurifiedInstance {
    pub triplet: RawTriplet,
    pub diff: Diff,
    pub anchors: Vec<Anchor>,
    pub technical_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RejectReason {
    #[error("{0}")]
    Linkage(String),
    #[error("{0}")]
    UnparsableDiff(DiffError),
    #[error("no diagnostic anchors")]
    NoAnchors,
    #[error("technical-content ratio {ratio:.4} below tau {tau}")]
    LowTechnicalContent { ratio: f64, tau: f64 },
}

impl RejectReason {
    pub fn code(&self) -> &'static str {
        match self {
            Self::Linkage(_) => "linkage",
            Self::UnparsableDiff(_) => "unparsable_diff",
            Self::NoAnchors => "no_anchors",
            Self::LowTechnicalContent { .. } => "low_technical_content",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Purification {
    Accepted(Box<PurifiedInstance>),
    Rejected {
        triplet: Box<RawTriplet>,
        reason: RejectReason,
    },
}

impl Purification {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Self::Accepted(_))
    }

    pub fn reason(&self) -> Option<&RejectReason> {
        match self {
            Self::Accepted(_) => None,
            Self::Rejected { reason, .. } => Some(reason),
        }
    }
}

pub fn purify(triplet: RawTriplet, purifier: &Purifier) -> Purification {
    let reject = |triplet: RawTriplet, reason| Purification::Rejected {
        triplet: Box::new(triplet),
        reason,
    };

    if !triplet.pr.merged {
        return reject(triplet, RejectReason::Linkage("pull request is not merged".into()));
    }
    if !triplet.pr.linked_issue_refs.contains(&triplet.issue.number) {
        let msg = format!("pull request does not reference issue #{}", triplet.issue.number);
        return reject(triplet, RejectReason::Linkage(msg));
    }
    let diff = match parse_unified_diff(&triplet.patch_text) {
        Ok(d) => d,
        Err(e) => return reject(triplet, RejectReason::UnparsableDiff(e)),
    };
    let anchors = detect_anchors(&triplet, purifier);
    if anchors.is_empty() {
        return reject(triplet, RejectReason::NoAnchors);
    }
    let ratio = purifier.ratio(&triplet);
    let tau = purifier.config.tau;
    if ratio < tau {
        return reject(triplet, RejectReason::LowTechnicalContent { ratio, tau });
    }
    Purification::Accepted(Box::new(PurifiedInstance {
        triplet,
        diff,
        anchors,
        technical_ratio: ratio,
    }))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::ingest::{AuthorRole, Comment, Issue, PullRequest};

    pub(crate) const PATCH: &str =
        "--- a/src/parse.py\n+++ b/src/parse.py\n@@ -1,2 +1,2 @@\n def parse(s):\n-    return s[0]\n+    return s[0] if s else None\n";

    pub(crate) fn triplet(comments: &[&str]) -> RawTriplet {
        RawTriplet {
            repo: "acme/widgets".into(),
            issue: Issue {
                number: 7,
                title: "crash on empty input".into(),
                body: "Calling parse(\"\") fails:\n\nTraceback (most recent call last):\n  File \"cli.py\", line 3, in <module>\n    parse(\"\")\nIndexError: string index out of range\n".into(),
                comments: comments.iter().map(|c| Comment::new(AuthorRole::Contributor, *c)).collect(),
            },
            pr: PullRequest {
                number: 9,
                merged: true,
                linked_issue_refs: vec![7],
                discussion: vec![],
                title: "Handle empty input".into(),
                body: "Fixes #7".into(),
            },
            patch_text: PATCH.into(),
        }
    }

    #[test]
    fn accepts_a_closed_loop_record() {
        let p = Purifier::default().purify(triplet(&["thanks!", "I can reproduce the error here"]));
        let Purification::Accepted(inst) = p else { panic!("{p:?}") };
        assert_eq!(inst.technical_ratio, 0.5);
        assert_eq!(inst.anchors.len(), 1);
    }

    #[test]
    fn rejection_order() {
        let purifier = Purifier::default();
        let mut t = triplet(&[]);
        t.pr.merged = false;
        t.patch_text = "garbage".into();
        t.issue.body = "prose only".into();
        assert_eq!(purifier.purify(t.clone()).reason().unwrap().code(), "linkage");
        t.pr.merged = true;
        t.pr.linked_issue_refs = vec![8];
        assert_eq!(purifier.purify(t.clone()).reason().unwrap().code(), "linkage");
        t.pr.linked_issue_refs = vec![7];
        assert_eq!(purifier.purify(t.clone()).reason().unwrap().code(), "unparsable_diff");
        t.patch_text = PATCH.into();
        assert_eq!(purifier.purify(t.clone()).reason().unwrap().code(), "no_anchors");
    }

    #[test]
    fn ratio_exactly_tau_is_accepted() {
        let purifier = Purifier::default();
        let t = triplet(&["see the traceback and the stack", "+1", "me too", "thanks", "bump"]);
        assert!(purifier.purify(t).is_accepted());
        let t = triplet(&["+1", "me too", "thanks", "bump", "any news?"]);
        let reason = purifier.purify(t).reason().cloned().unwrap();
        assert_eq!(reason, RejectReason::LowTechnicalContent { ratio: 0.0, tau: 0.2 });
    }

    #[test]
    fn config_errors() {
        let bad_tau = PurificationConfig {
            tau: 1.5,
            ..Default::default()
        };
        assert_eq!(Purifier::new(bad_tau).unwrap_err(), PurifyConfigError::Tau(1.5));
        let bad_pattern = PurificationConfig {
            anchor_patterns: vec!["ok".into(), "(unclosed".into()],
            ..Default::default()
        };
        assert!(matches!(
            Purifier::new(bad_pattern).unwrap_err(),
            PurifyConfigError::Pattern { index: 1, .. }
        ));
    }

    #[test]
    fn raising_tau_never_admits() {
        let t = triplet(&["the error is a null deref", "hi", "hello"]);
        let mut last_accepted = true;
        for step in 0..=20 {
            let purifier = Purifier::new(PurificationConfig {
                tau: step as f64 / 20.0,
                ..Default::default()
            })
            .unwrap();
            let accepted = purifier.purify(t.clone()).is_accepted();
            assert!(last_accepted || !accepted);
            last_accepted = accepted;
        }
    }
}
