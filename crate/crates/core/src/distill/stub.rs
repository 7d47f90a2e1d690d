//! Deterministic rule-based distiller for offline runs and tests.
//!
//! - summary: the issue title, with repository identifiers scrubbed
//! - signals: anchor tokens, then title keywords, padded to the minimum from
//!   diff-path tokens and truncated to the maximum
//! - root cause, fix strategy, digest: templated from the diff
//! - verification: names test files touched by the diff, if any

use std::sync::OnceLock;

use regex::Regex;

use super::{CardDraft, CardField, DistillError, Distiller, DistillerRequest};
use crate::card::{
    normalize_signal, IndexLayer, ResolutionLayer, AREA_PREFIX, CHUNK_PREFIX, MAX_KEY_CHUNKS,
    MAX_SIGNALS, MIN_KEY_CHUNKS, MIN_SIGNALS,
};
use crate::purify::diff::{FileDiff, LineKind};
use crate::purify::PurifiedInstance;

const STOPWORDS: &[&str] = &[
    "the", "and", "for", "with", "when", "that", "this", "from", "into", "not", "are", "was", "but",
    "has", "have", "had", "been", "its", "out", "of", "on", "in", "to", "is", "it", "an", "a", "or",
    "be", "by", "as", "at", "if", "after", "before", "does", "doesn", "don", "can", "cannot",
    "should", "would", "could", "will", "while", "where", "which", "there", "then", "than", "some",
    "any", "all", "only", "also", "via", "using", "use", "used", "fix", "fixes", "fixed", "issue",
    "bug", "error", "errors", "wrong", "broken", "fails", "failing", "failed", "failure", "raise",
    "raises", "raised", "throws", "thrown", "get", "gets", "set", "new", "now", "you", "your",
];

/// Words that appear in nearly every stack trace and carry no signal.
const TRACE_BOILERPLATE: &[&str] = &[
    "traceback", "most", "recent", "call", "last", "file", "line", "module", "lib", "site",
    "packages", "thread", "main", "panicked", "note", "run", "with", "backtrace", "env", "var",
];

const DEFAULT_SUMMARY: &str = "Unspecified failure";

fn identifier() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[A-Za-z_][A-Za-z0-9_]*").unwrap())
}

fn hex_run() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[0-9A-Fa-f]{12,}").unwrap())
}

/// Lowercased alphanumeric words.
pub fn word_tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn keep_token(tok: &str, extra_stop: &[&str]) -> bool {
    tok.len() >= 3
        && !tok.bytes().all(|b| b.is_ascii_digit())
        && !hex_run().is_match(tok)
        && !STOPWORDS.contains(&tok)
        && !extra_stop.contains(&tok)
}

/// Identifier-like tokens from the diagnostic anchors, in order of appearance.
pub fn anchor_tokens(instance: &PurifiedInstance) -> Vec<String> {
    excerpt_tokens(instance.anchors.iter().map(|a| a.excerpt.as_str()))
}

/// Identifier-like tokens from anchor excerpts, trace boilerplate removed.
pub fn excerpt_tokens<'a>(excerpts: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    excerpts
        .into_iter()
        .flat_map(|e| identifier().find_iter(e).map(|m| m.as_str().to_lowercase()))
        .filter(|t| keep_token(t, TRACE_BOILERPLATE))
        .collect()
}

pub fn title_keywords(title: &str) -> Vec<String> {
    word_tokens(title).into_iter().filter(|t| keep_token(t, &[])).collect()
}

/// Directory and file-stem components of every changed path.
pub fn path_tokens(instance: &PurifiedInstance) -> Vec<String> {
    instance
        .diff
        .files
        .iter()
        .flat_map(|f| {
            let path = f.path();
            let stem_end = path.rfind('.').filter(|&i| i > path.rfind('/').map_or(0, |j| j + 1));
            let path = &path[..stem_end.unwrap_or(path.len())];
            path.split(['/', '.', '_', '-'])
                .map(str::to_lowercase)
                .collect::<Vec<_>>()
        })
        .filter(|t| keep_token(t, &[]))
        .collect()
}

/// Identifiers from changed lines and hunk sections.
fn code_tokens(instance: &PurifiedInstance) -> Vec<String> {
    instance
        .diff
        .files
        .iter()
        .flat_map(|f| &f.hunks)
        .flat_map(|h| {
            std::iter::once(h.section.as_str()).chain(
                h.lines
                    .iter()
                    .filter(|l| l.kind != LineKind::Context)
                    .map(|l| l.text.as_str()),
            )
        })
        .flat_map(|text| identifier().find_iter(text).map(|m| m.as_str().to_lowercase()))
        .filter(|t| keep_token(t, &[]))
        .collect()
}

/// Removes hex runs and the repository slug from index-layer text.
pub fn scrub_repo_identifiers(text: &str, repo: &str) -> String {
    let mut out = hex_run().replace_all(text, "").into_owned();
    let repo = repo.trim();
    if !repo.is_empty() {
        let pattern = format!("(?i){}", regex::escape(repo));
        if let Ok(re) = Regex::new(&pattern) {
            out = re.replace_all(&out, "").into_owned();
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn first_line(text: &str, max_chars: usize) -> String {
    let line = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    line.chars().take(max_chars).collect()
}

fn symptom(instance: &PurifiedInstance) -> String {
    // The last line of a traceback names the exception; elsewhere the first line is best.
    let Some(anchor) = instance.anchors.first() else {
        return "the reported failure".into();
    };
    let line = if anchor.excerpt.starts_with("Traceback") {
        anchor.excerpt.lines().last().unwrap_or_default().trim().to_string()
    } else {
        first_line(&anchor.excerpt, 160)
    };
    format!("`{}`", line.chars().take(160).collect::<String>())
}

fn file_list(files: &[&FileDiff]) -> String {
    let names: Vec<String> = files.iter().map(|f| format!("`{}`", f.path())).collect();
    match names.len() {
        0 => "the changed files".into(),
        1 => names[0].clone(),
        n => format!("{} and {}", names[..n - 1].join(", "), names[n - 1]),
    }
}

fn is_test_path(path: &str) -> bool {
    let lower = path.to_lowercase();
    lower.split(['/', '.', '_', '-']).any(|c| {
        c == "test" || c == "tests" || c == "spec" || c == "specs" || c == "testing" || c.starts_with("test")
    })
}

#[derive(Debug, Clone, Copy, Default)]
pub struct StubDistiller;

impl StubDistiller {
    fn summary(&self, req: &DistillerRequest) -> String {
        let t = &req.instance.triplet;
        let title = scrub_repo_identifiers(&req.condensed.issue_title, &t.repo);
        if !title.is_empty() {
            return title;
        }
        let body = scrub_repo_identifiers(&first_line(&req.condensed.issue_body, 200), &t.repo);
        if body.is_empty() {
            DEFAULT_SUMMARY.into()
        } else {
            body
        }
    }

    fn signals(&self, req: &DistillerRequest, widen: bool) -> Vec<String> {
        let inst = &req.instance;
        let mut out: Vec<String> = Vec::new();
        let push = |tok: String, out: &mut Vec<String>| {
            if let Ok(n) = normalize_signal(&tok) {
                if !out.contains(&n) {
                    out.push(n);
                }
            }
        };
        for tok in anchor_tokens(inst).into_iter().chain(title_keywords(&req.condensed.issue_title)) {
            push(tok, &mut out);
        }
        let mut padding = path_tokens(inst);
        if widen {
            padding.extend(code_tokens(inst));
        }
        for tok in padding {
            if out.len() >= MIN_SIGNALS {
                break;
            }
            push(tok, &mut out);
        }
        out.truncate(MAX_SIGNALS);
        out
    }

    fn root_cause(&self, inst: &PurifiedInstance) -> String {
        let files: Vec<&FileDiff> = inst.diff.files.iter().collect();
        let sections: Vec<&str> = inst
            .diff
            .files
            .iter()
            .flat_map(|f| &f.hunks)
            .map(|h| h.section.trim())
            .filter(|s| !s.is_empty())
            .collect();
        let location = if sections.is_empty() {
            "the lines the patch rewrites".to_string()
        } else {
            format!("`{}`", sections.join("`, `"))
        };
        format!(
            "The failure {} originates in {}. The logic in {} does not handle the input described in the report.",
            symptom(inst),
            file_list(&files),
            location
        )
    }

    fn fix_strategy(&self, inst: &PurifiedInstance) -> String {
        let mut parts = Vec::new();
        for f in &inst.diff.files {
            let mut part = format!(
                "Modify `{}`: remove {} line(s) and add {} line(s) across {} hunk(s)",
                f.path(),
                f.removed(),
                f.added(),
                f.hunks.len()
            );
            if let Some(example) = f
                .hunks
                .iter()
                .flat_map(|h| &h.lines)
                .find(|l| l.kind == LineKind::Add && !l.text.trim().is_empty())
            {
                part.push_str(&format!(", e.g. `{}`", example.text.trim()));
            }
            part.push('.');
            parts.push(part);
        }
        parts.join(" ")
    }

    fn patch_digest(&self, inst: &PurifiedInstance) -> String {
        let mut lines = Vec::new();
        for f in &inst.diff.files {
            lines.push(format!("{AREA_PREFIX} {} (+{} -{})", f.path(), f.added(), f.removed()));
        }
        let mut chunks = Vec::new();
        for f in &inst.diff.files {
            for h in &f.hunks {
                let mut c = format!(
                    "{CHUNK_PREFIX} {} @@ -{},{} +{},{} @@",
                    f.path(),
                    h.old_start,
                    h.old_len,
                    h.new_start,
                    h.new_len
                );
                if !h.section.trim().is_empty() {
                    c.push(' ');
                    c.push_str(h.section.trim());
                }
                chunks.push(c);
            }
        }
        if chunks.len() < MIN_KEY_CHUNKS {
            'outer: for f in &inst.diff.files {
                for l in f.hunks.iter().flat_map(|h| &h.lines) {
                    if chunks.len() >= MIN_KEY_CHUNKS {
                        break 'outer;
                    }
                    let sign = match l.kind {
                        LineKind::Add => '+',
                        LineKind::Del => '-',
                        LineKind::Context => continue,
                    };
                    if l.text.trim().is_empty() {
                        continue;
                    }
                    chunks.push(format!("{CHUNK_PREFIX} {} {sign} `{}`", f.path(), l.text.trim()));
                }
            }
        }
        chunks.truncate(MAX_KEY_CHUNKS);
        lines.extend(chunks);
        lines.join("\n")
    }

    fn verification(&self, inst: &PurifiedInstance) -> String {
        let tests: Vec<&FileDiff> = inst.diff.files.iter().filter(|f| is_test_path(f.path())).collect();
        if tests.is_empty() {
            let first = inst.diff.files.first().map(|f| f.path()).unwrap_or("the changed module");
            format!(
                "Reproduce the original failure {} before the change, then confirm it no longer occurs and re-run the tests covering `{}`.",
                symptom(inst),
                first
            )
        } else {
            format!(
                "Run the tests in {}; they must pass with the patch applied and fail on the pre-fix code.",
                file_list(&tests)
            )
        }
    }
}

impl Distiller for StubDistiller {
    fn distill(&self, req: &DistillerRequest) -> Result<CardDraft, DistillError> {
        let inst = &req.instance;
        let regenerate = req.fields_to_regenerate();
        let widen = req.feedback.is_some() && regenerate.contains(&CardField::Signals);
        let previous = req.previous_draft.as_ref().filter(|_| req.feedback.is_some());
        let keep = |f: CardField| previous.filter(|_| !regenerate.contains(&f));

        let index = IndexLayer {
            problem_summary: match keep(CardField::ProblemSummary) {
                Some(p) => p.index.problem_summary.clone(),
                None => self.summary(req),
            },
            signals: match keep(CardField::Signals) {
                Some(p) => p.index.signals.clone(),
                None => self.signals(req, widen),
            },
        };
        let resolution = ResolutionLayer {
            root_cause: match keep(CardField::RootCause) {
                Some(p) => p.resolution.root_cause.clone(),
                None => self.root_cause(inst),
            },
            fix_strategy: match keep(CardField::FixStrategy) {
                Some(p) => p.resolution.fix_strategy.clone(),
                None => self.fix_strategy(inst),
            },
            patch_digest: match keep(CardField::PatchDigest) {
                Some(p) => p.resolution.patch_digest.clone(),
                None => self.patch_digest(inst),
            },
            verification: match keep(CardField::Verification) {
                Some(p) => p.resolution.verification.clone(),
                None => self.verification(inst),
            },
        };
        Ok(CardDraft { index, resolution })
    }
}
