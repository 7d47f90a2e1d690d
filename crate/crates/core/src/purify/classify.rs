use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use regex::Regex;

use crate::ingest::Comment;

/// Decides whether a comment carries technical content.
pub trait CommentClassifier: Send + Sync {
    fn is_technical(&self, comment: &Comment) -> bool;
}

impl<F> CommentClassifier for F
where
    F: Fn(&Comment) -> bool + Send + Sync,
{
    fn is_technical(&self, comment: &Comment) -> bool {
        self(comment)
    }
}

fn code_path() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"(?:^|[\s(\[`'\x22])(?:[\w.-]+/)*[\w-]+\.(?:rs|py|pyi|pyx|js|jsx|mjs|ts|tsx|go|java|kt|kts|scala|c|h|cc|cpp|cxx|hpp|hh|cs|rb|php|swift|m|mm|sh|bash|lua|pl|r|jl|ex|exs|erl|hs|ml|clj|dart|vue|sql|toml|ya?ml|json|xml|gradle|cmake|proto)(?::\d+)*(?:$|[\s)\]`'\x22,;:.])",
        )
        .unwrap()
    })
}

/// The default classifier. A comment is technical when it has a fenced code
/// block, a diagnostic anchor, a source-file path, or at least
/// `min_lexicon_terms` distinct lexicon terms. A term matches any word that
/// starts with it, so `errors` and `reproduced` count.
#[derive(Debug, Clone)]
pub struct RuleClassifier {
    anchors: Arc<Vec<Regex>>,
    lexicon: Vec<String>,
    min_lexicon_terms: usize,
}

impl RuleClassifier {
    pub fn new(anchors: Arc<Vec<Regex>>, lexicon: Vec<String>, min_lexicon_terms: usize) -> Self {
        Self {
            anchors,
            lexicon: lexicon.into_iter().map(|t| t.to_lowercase()).collect(),
            min_lexicon_terms,
        }
    }

    pub fn lexicon_hits(&self, text: &str) -> usize {
        let words: Vec<String> = text
            .split(|c: char| !c.is_alphanumeric())
            .filter(|w| !w.is_empty())
            .map(str::to_lowercase)
            .collect();
        self.lexicon
            .iter()
            .filter(|term| words.iter().any(|w| w.starts_with(term.as_str())))
            .collect::<HashSet<_>>()
            .len()
    }

    pub fn is_technical_text(&self, text: &str) -> bool {
        text.contains("```")
            || self.anchors.iter().any(|re| re.is_match(text))
            || code_path().is_match(text)
            || self.lexicon_hits(text) >= self.min_lexicon_terms
    }
}

impl CommentClassifier for RuleClassifier {
    fn is_technical(&self, comment: &Comment) -> bool {
        self.is_technical_text(&comment.body)
    }
}

/// Fraction of comments classified technical. An empty thread scores 1.0.
pub fn technical_content_ratio(comments: &[&Comment], classifier: &dyn CommentClassifier) -> f64 {
    if comments.is_empty() {
        return 1.0;
    }
    let technical = comments.iter().filter(|c| classifier.is_technical(c)).count();
    technical as f64 / comments.len() as f64
}

/// Like [`technical_content_ratio`], weighted by comment length in characters.
pub fn technical_content_ratio_by_chars(
    comments: &[&Comment],
    classifier: &dyn CommentClassifier,
) -> f64 {
    let total: usize = comments.iter().map(|c| c.body.chars().count()).sum();
    if total == 0 {
        return 1.0;
    }
    let technical: usize = comments
        .iter()
        .filter(|c| classifier.is_technical(c))
        .map(|c| c.body.chars().count())
        .sum();
    technical as f64 / total as f64
}
