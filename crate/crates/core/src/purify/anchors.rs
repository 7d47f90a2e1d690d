use std::ops::Range;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::Purifier;
use crate::ingest::RawTriplet;

/// Where in the thread an anchor was found. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "index", rename_all = "snake_case")]
pub enum AnchorSource {
    IssueBody,
    IssueComment(usize),
    PrDiscussion(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    pub source: AnchorSource,
    pub excerpt: String,
}

/// Byte ranges of `text` matched by any pattern, merged into maximal regions.
///
/// Overlapping matches merge, and so do matches on consecutive lines; a blank
/// line or any other text in between starts a new region.
pub fn anchor_regions(text: &str, patterns: &[Regex]) -> Vec<Range<usize>> {
    let mut spans: Vec<Range<usize>> = patterns
        .iter()
        .flat_map(|re| re.find_iter(text).map(|m| m.range()))
        .filter(|r| !text[r.clone()].trim().is_empty())
        .collect();
    spans.sort_by_key(|r| (r.start, r.end));

    let mut merged: Vec<Range<usize>> = Vec::new();
    for span in spans {
        if let Some(last) = merged.last_mut() {
            let joins = span.start <= last.end || {
                let gap = &text[last.end..span.start];
                gap.trim().is_empty() && gap.matches('\n').count() <= 1
            };
            if joins {
                last.end = last.end.max(span.end);
                continue;
            }
        }
        merged.push(span);
    }
    merged
}

pub fn excerpts<'t>(text: &'t str, patterns: &[Regex]) -> impl Iterator<Item = &'t str> {
    anchor_regions(text, patterns)
        .into_iter()
        .map(move |r| text[r].trim_matches(|c: char| c == '\n' || c == '\r'))
}

/// Diagnostic anchors in the issue body, issue comments and PR discussion, in
/// that order.
pub fn detect_anchors(triplet: &RawTriplet, purifier: &Purifier) -> Vec<Anchor> {
    let patterns = purifier.anchor_patterns();
    let mut texts = vec![(AnchorSource::IssueBody, triplet.issue.body.as_str())];
    texts.extend(
        triplet
            .issue
            .comments
            .iter()
            .enumerate()
            .map(|(i, c)| (AnchorSource::IssueComment(i), c.body.as_str())),
    );
    texts.extend(
        triplet
            .pr
            .discussion
            .iter()
            .enumerate()
            .map(|(i, c)| (AnchorSource::PrDiscussion(i), c.body.as_str())),
    );
    texts
        .into_iter()
        .flat_map(|(source, text)| {
            excerpts(text, patterns).map(move |e| Anchor {
                source,
                excerpt: e.to_string(),
            })
        })
        .collect()
}
