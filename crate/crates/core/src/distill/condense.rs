use serde::{Deserialize, Serialize};

use crate::ingest::Comment;
use crate::purify::diff::Diff;
use crate::purify::{CommentClassifier, PurifiedInstance};

/// Shortest run of lines considered a repeated log block.
pub const MIN_REPEAT_LINES: usize = 3;
/// Longest block searched for repeats; bounds the cost on very long logs.
const MAX_REPEAT_LINES: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensedThread {
    pub issue_title: String,
    pub issue_body: String,
    pub kept_comments: Vec<Comment>,
    pub dropped_count: usize,
    pub diff_summary_lines: Vec<String>,
}

pub fn is_repeat_marker(line: &str) -> bool {
    line.strip_prefix("[×")
        .and_then(|s| s.strip_suffix(']'))
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()))
}

/// One pass: at each position, the shortest block of at least
/// [`MIN_REPEAT_LINES`] lines that repeats back-to-back is kept once and
/// followed by a `[×N]` marker. Blocks never contain markers or consist only
/// of blank lines.
fn collapse_once(lines: &[&str]) -> Vec<String> {
    let n = lines.len();
    let mut out = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let mut collapsed = false;
        let max_len = ((n - i) / 2).min(MAX_REPEAT_LINES);
        for len in MIN_REPEAT_LINES..=max_len {
            let block = &lines[i..i + len];
            if block.iter().any(|l| is_repeat_marker(l)) {
                break;
            }
            if block.iter().all(|l| l.trim().is_empty()) || block != &lines[i + len..i + 2 * len] {
                continue;
            }
            let mut copies = 2;
            while i + (copies + 1) * len <= n && lines[i + copies * len..i + (copies + 1) * len] == *block {
                copies += 1;
            }
            out.extend(block.iter().map(|l| l.to_string()));
            out.push(format!("[×{copies}]"));
            i += copies * len;
            collapsed = true;
            break;
        }
        if !collapsed {
            out.push(lines[i].to_string());
            i += 1;
        }
    }
    out
}

/// Collapses back-to-back repeats of multi-line blocks until none remain.
/// Text without such repeats is returned unchanged, byte for byte.
pub fn collapse_repeated_blocks(text: &str) -> String {
    let mut current = text.to_string();
    loop {
        let lines: Vec<&str> = current.split('\n').collect();
        let next = collapse_once(&lines);
        if next.len() == lines.len() {
            return current;
        }
        current = next.join("\n");
    }
}

fn diff_summary(diff: &Diff) -> Vec<String> {
    let mut out = Vec::new();
    for file in &diff.files {
        out.push(format!(
            "{}: +{} -{} in {} hunk(s)",
            file.path(),
            file.added(),
            file.removed(),
            file.hunks.len()
        ));
        for h in &file.hunks {
            let mut line = format!(
                "  @@ -{},{} +{},{} @@",
                h.old_start, h.old_len, h.new_start, h.new_len
            );
            if !h.section.is_empty() {
                line.push(' ');
                line.push_str(&h.section);
            }
            out.push(line);
        }
    }
    out
}

/// Keeps technical comments and collapses repeated log blocks. Kept text is
/// otherwise untouched.
pub fn condense(
    issue_title: &str,
    issue_body: &str,
    comments: &[Comment],
    diff: &Diff,
    classifier: &dyn CommentClassifier,
) -> CondensedThread {
    let kept_comments: Vec<Comment> = comments
        .iter()
        .filter(|c| classifier.is_technical(c))
        .map(|c| Comment {
            body: collapse_repeated_blocks(&c.body),
            ..c.clone()
        })
        .collect();
    CondensedThread {
        issue_title: issue_title.to_string(),
        issue_body: collapse_repeated_blocks(issue_body),
        dropped_count: comments.len() - kept_comments.len(),
        kept_comments,
        diff_summary_lines: diff_summary(diff),
    }
}

/// Condenses the instance's issue comments followed by its PR discussion.
pub fn purify_content(instance: &PurifiedInstance, classifier: &dyn CommentClassifier) -> CondensedThread {
    let t = &instance.triplet;
    let comments: Vec<Comment> = t.thread().cloned().collect();
    condense(&t.issue.title, &t.issue.body, &comments, &instance.diff, classifier)
}
