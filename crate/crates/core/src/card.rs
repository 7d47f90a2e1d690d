//! Experience-card data model and its lexical/structural validation.
//!
//! A card has two layers. The index layer (problem summary and diagnostic
//! signals) is what gets embedded and searched. The resolution layer (root
//! cause, fix strategy, patch digest, verification) is only handed out when an
//! agent browses a card.
//!
//! The patch digest is a single text field. Lines starting with `AREA:` name
//! changed areas, lines starting with `CHUNK:` describe key chunks.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MIN_SIGNALS: usize = 10;
pub const MAX_SIGNALS: usize = 18;
pub const MAX_SIGNAL_WORDS: usize = 6;
pub const MIN_KEY_CHUNKS: usize = 3;
pub const MAX_KEY_CHUNKS: usize = 8;
/// Hex runs at least this long are treated as commit hashes.
pub const MIN_HEX_IDENTIFIER_LEN: usize = 12;

pub const AREA_PREFIX: &str = "AREA:";
pub const CHUNK_PREFIX: &str = "CHUNK:";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CardError {
    #[error("signal is empty after normalization")]
    EmptySignal,
}

/// Where a card was distilled from.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CardSource {
    pub repo: String,
    pub issue: u64,
    pub pr: u64,
}

impl fmt::Display for CardSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{} (pr {})", self.repo, self.issue, self.pr)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexLayer {
    pub problem_summary: String,
    pub signals: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResolutionLayer {
    pub root_cause: String,
    pub fix_strategy: String,
    pub patch_digest: String,
    pub verification: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperienceCard {
    pub card_id: String,
    pub source: CardSource,
    pub index: IndexLayer,
    pub resolution: ResolutionLayer,
}

impl ExperienceCard {
    /// Deterministic card id derived from the source triplet.
    pub fn id_for_source(source: &CardSource) -> String {
        let key = format!("{}\u{1f}{}\u{1f}{}", source.repo, source.issue, source.pr);
        format!("mg-{:016x}", crate::fnv1a64(key.as_bytes()))
    }

    /// The exact text embedded for retrieval: summary, newline, signals joined by `"; "`.
    ///
    /// Nothing from the resolution layer takes part.
    pub fn index_text(&self) -> String {
        format!(
            "{}\n{}",
            self.index.problem_summary,
            self.index.signals.join("; ")
        )
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("card serialization is infallible")
    }
}

/// One violated invariant: the field it concerns and why.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub reason: String,
}

impl Violation {
    fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

/// Case-fold, collapse internal whitespace, strip the ends.
pub fn normalize_signal(raw: &str) -> Result<String, CardError> {
    let normalized = raw
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ");
    if normalized.is_empty() {
        Err(CardError::EmptySignal)
    } else {
        Ok(normalized)
    }
}

fn hex_run() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[0-9A-Fa-f]{12,}").unwrap())
}

/// Lexical check for repository-specific identifiers: a hex run of 12+
/// characters, or the repo slug itself (case-insensitive).
pub fn contains_repo_identifier(text: &str, repo: &str) -> bool {
    if hex_run().is_match(text) {
        return true;
    }
    let repo = repo.trim();
    !repo.is_empty() && text.to_lowercase().contains(&repo.to_lowercase())
}

/// Parsed view of a patch digest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DigestSections {
    pub areas: Vec<String>,
    pub chunks: Vec<String>,
}

/// Splits a patch digest into its `AREA:` and `CHUNK:` lines.
///
/// Leading whitespace before the prefix is allowed; a prefixed line with an
/// empty remainder does not count.
pub fn parse_patch_digest(digest: &str) -> DigestSections {
    let mut sections = DigestSections::default();
    for line in digest.lines() {
        let line = line.trim_start();
        if let Some(rest) = line.strip_prefix(AREA_PREFIX) {
            let rest = rest.trim();
            if !rest.is_empty() {
                sections.areas.push(rest.to_string());
            }
        } else if let Some(rest) = line.strip_prefix(CHUNK_PREFIX) {
            let rest = rest.trim();
            if !rest.is_empty() {
                sections.chunks.push(rest.to_string());
            }
        }
    }
    sections
}

/// Returns every violated card invariant. An empty list means the card is valid.
pub fn validate_schema(card: &ExperienceCard) -> Vec<Violation> {
    let mut out = Vec::new();

    if card.card_id.trim().is_empty() {
        out.push(Violation::new("card_id", "empty"));
    }
    if card.source.repo.trim().is_empty() {
        out.push(Violation::new("source.repo", "empty"));
    }
    if card.source.issue == 0 {
        out.push(Violation::new("source.issue", "must be positive"));
    }
    if card.source.pr == 0 {
        out.push(Violation::new("source.pr", "must be positive"));
    }

    let repo = card.source.repo.as_str();
    let summary = &card.index.problem_summary;
    if summary.trim().is_empty() {
        out.push(Violation::new("problem_summary", "empty"));
    } else if contains_repo_identifier(summary, repo) {
        out.push(Violation::new("problem_summary", "repo-specific identifier"));
    }

    let signals = &card.index.signals;
    if signals.len() < MIN_SIGNALS {
        out.push(Violation::new(
            "signals",
            format!("count {} below minimum {MIN_SIGNALS}", signals.len()),
        ));
    } else if signals.len() > MAX_SIGNALS {
        out.push(Violation::new(
            "signals",
            format!("count {} above maximum {MAX_SIGNALS}", signals.len()),
        ));
    }
    let mut seen: Vec<String> = Vec::with_capacity(signals.len());
    for (i, signal) in signals.iter().enumerate() {
        let field = format!("signals[{i}]");
        let normalized = match normalize_signal(signal) {
            Ok(n) => n,
            Err(_) => {
                out.push(Violation::new(field, "empty"));
                continue;
            }
        };
        let words = normalized.split(' ').count();
        if words > MAX_SIGNAL_WORDS {
            out.push(Violation::new(
                field.clone(),
                format!("{words} words exceeds maximum {MAX_SIGNAL_WORDS}"),
            ));
        }
        if contains_repo_identifier(signal, repo) {
            out.push(Violation::new(field.clone(), "repo-specific identifier"));
        }
        if let Some(first) = seen.iter().position(|s| *s == normalized) {
            out.push(Violation::new(field, format!("duplicate of signals[{first}]")));
        }
        seen.push(normalized);
    }

    let resolution = &card.resolution;
    for (name, value) in [
        ("root_cause", &resolution.root_cause),
        ("fix_strategy", &resolution.fix_strategy),
        ("patch_digest", &resolution.patch_digest),
        ("verification", &resolution.verification),
    ] {
        if value.trim().is_empty() {
            out.push(Violation::new(name, "empty"));
        }
    }
    if !resolution.patch_digest.trim().is_empty() {
        let digest = parse_patch_digest(&resolution.patch_digest);
        if digest.areas.is_empty() {
            out.push(Violation::new("patch_digest", "no AREA: lines"));
        }
        let chunks = digest.chunks.len();
        if !(MIN_KEY_CHUNKS..=MAX_KEY_CHUNKS).contains(&chunks) {
            out.push(Violation::new(
                "patch_digest",
                format!("{chunks} CHUNK: lines outside {MIN_KEY_CHUNKS}..={MAX_KEY_CHUNKS}"),
            ));
        }
    }

    out
}
