//! Unified diff parsing and rendering.
//!
//! Standard unified format only. Git extended headers (`diff --git`, `index`,
//! mode changes, renames, copies) are kept verbatim as file metadata. Binary
//! patches are rejected. Text outside file sections (commit messages, email
//! signatures, diffstats) is ignored.
//!
//! Hunk bodies are consumed by their declared lengths, so a deleted line that
//! happens to start with `-- ` is read as content rather than a file header.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LineKind {
    Context,
    Add,
    Del,
}

impl LineKind {
    fn prefix(self) -> char {
        match self {
            Self::Context => ' ',
            Self::Add => '+',
            Self::Del => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffLine {
    pub kind: LineKind,
    pub text: String,
    /// Followed by `\ No newline at end of file`.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub no_newline: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hunk {
    pub old_start: u64,
    pub old_len: u64,
    pub new_start: u64,
    pub new_len: u64,
    /// Text after the closing `@@`, e.g. an enclosing function name.
    pub section: String,
    pub lines: Vec<DiffLine>,
}

impl Hunk {
    pub fn added(&self) -> usize {
        self.lines.iter().filter(|l| l.kind == LineKind::Add).count()
    }

    pub fn removed(&self) -> usize {
        self.lines.iter().filter(|l| l.kind == LineKind::Del).count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDiff {
    pub old_path: String,
    pub new_path: String,
    pub extended_headers: Vec<String>,
    pub hunks: Vec<Hunk>,
}

impl FileDiff {
    /// Repository-relative path: the new side unless the file was deleted,
    /// with any `a/` or `b/` prefix removed.
    pub fn path(&self) -> &str {
        let raw = if self.new_path == DEV_NULL {
            &self.old_path
        } else {
            &self.new_path
        };
        strip_side_prefix(raw)
    }

    pub fn added(&self) -> usize {
        self.hunks.iter().map(Hunk::added).sum()
    }

    pub fn removed(&self) -> usize {
        self.hunks.iter().map(Hunk::removed).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diff {
    pub files: Vec<FileDiff>,
}

impl Diff {
    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(FileDiff::path)
    }

    pub fn hunk_count(&self) -> usize {
        self.files.iter().map(|f| f.hunks.len()).sum()
    }
}

pub const DEV_NULL: &str = "/dev/null";

pub fn strip_side_prefix(path: &str) -> &str {
    path.strip_prefix("a/")
        .or_else(|| path.strip_prefix("b/"))
        .unwrap_or(path)
}

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiffErrorKind {
    #[error("empty input")]
    EmptyInput,
    #[error("no file sections found")]
    NoFiles,
    #[error("malformed file header: {0}")]
    MalformedFileHeader(String),
    #[error("malformed hunk header")]
    MalformedHunkHeader,
    #[error("hunk header outside a file section")]
    HunkOutsideFile,
    #[error("hunk line counts do not match header: {0}")]
    CountMismatch(String),
    #[error("binary patch")]
    Binary,
}

/// A parse failure with the 1-based line it concerns.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("line {line}: {kind}")]
pub struct DiffError {
    pub line: usize,
    pub kind: DiffErrorKind,
}

fn err(line: usize, kind: DiffErrorKind) -> DiffError {
    DiffError { line, kind }
}

fn hunk_header() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@(?: (.*))?$").unwrap()
    })
}

const EXTENDED_HEADER_PREFIXES: &[&str] = &[
    "index ",
    "old mode ",
    "new mode ",
    "deleted file mode ",
    "new file mode ",
    "similarity index ",
    "dissimilarity index ",
    "rename from ",
    "rename to ",
    "copy from ",
    "copy to ",
];

fn is_binary_marker(line: &str) -> bool {
    line.starts_with("Binary files ") || line == "GIT binary patch"
}

/// Parses `diff --git a/x b/y` into its two paths.
fn git_header_paths(line: &str) -> (String, String) {
    let rest = line.trim_start_matches("diff --git ").trim_end_matches('\r');
    match rest.find(" b/") {
        Some(pos) => (rest[..pos].to_string(), rest[pos + 1..].to_string()),
        None => (rest.to_string(), rest.to_string()),
    }
}

/// Path from a `---`/`+++` line, without timestamp.
fn header_path(rest: &str) -> String {
    let rest = rest.trim_end_matches('\r');
    rest.split('\t').next().unwrap_or(rest).trim_end().to_string()
}

struct Parser<'a> {
    lines: Vec<&'a str>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn line_no(&self) -> usize {
        self.pos + 1
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Diff, DiffError> {
        let mut files = Vec::new();
        let mut pending: Option<FileDiff> = None;

        while let Some(line) = self.peek() {
            if line.starts_with("diff --git ") {
                files.extend(pending.take());
                let (old_path, new_path) = git_header_paths(line);
                pending = Some(FileDiff {
                    old_path,
                    new_path,
                    extended_headers: vec![line.trim_end_matches('\r').to_string()],
                    hunks: Vec::new(),
                });
                self.pos += 1;
            } else if is_binary_marker(line) {
                return Err(err(self.line_no(), DiffErrorKind::Binary));
            } else if let (Some(file), true) = (
                pending.as_mut(),
                EXTENDED_HEADER_PREFIXES.iter().any(|p| line.starts_with(p)),
            ) {
                file.extended_headers.push(line.trim_end_matches('\r').to_string());
                self.pos += 1;
            } else if let Some(rest) = line.strip_prefix("--- ") {
                let header_line = self.line_no();
                let Some(target) = self.lines.get(self.pos + 1).and_then(|l| l.strip_prefix("+++ "))
                else {
                    return Err(err(
                        header_line,
                        DiffErrorKind::MalformedFileHeader("'---' not followed by '+++'".into()),
                    ));
                };
                let mut file = pending.take().unwrap_or_else(|| FileDiff {
                    old_path: String::new(),
                    new_path: String::new(),
                    extended_headers: Vec::new(),
                    hunks: Vec::new(),
                });
                file.old_path = header_path(rest);
                file.new_path = header_path(target);
                self.pos += 2;
                if !self.peek().is_some_and(|l| l.starts_with("@@")) {
                    return Err(err(
                        header_line,
                        DiffErrorKind::MalformedFileHeader("file header without hunks".into()),
                    ));
                }
                while self.peek().is_some_and(|l| l.starts_with("@@")) {
                    file.hunks.push(self.hunk()?);
                }
                files.push(file);
            } else if line.starts_with("+++ ") {
                return Err(err(
                    self.line_no(),
                    DiffErrorKind::MalformedFileHeader("'+++' without preceding '---'".into()),
                ));
            } else if line.starts_with("@@") {
                return Err(err(self.line_no(), DiffErrorKind::HunkOutsideFile));
            } else {
                // Commit message, diffstat, signature, or the end of a header-only file.
                files.extend(pending.take());
                self.pos += 1;
            }
        }
        files.extend(pending.take());

        if files.is_empty() {
            return Err(err(1, DiffErrorKind::NoFiles));
        }
        Ok(Diff { files })
    }

    fn hunk(&mut self) -> Result<Hunk, DiffError> {
        let header_line = self.line_no();
        let header = self.peek().unwrap_or_default().trim_end_matches('\r');
        let caps = hunk_header()
            .captures(header)
            .ok_or_else(|| err(header_line, DiffErrorKind::MalformedHunkHeader))?;
        let num = |i: usize, default: u64| -> Result<u64, DiffError> {
            match caps.get(i) {
                Some(m) => m
                    .as_str()
                    .parse()
                    .map_err(|_| err(header_line, DiffErrorKind::MalformedHunkHeader)),
                None => Ok(default),
            }
        };
        let mut hunk = Hunk {
            old_start: num(1, 0)?,
            old_len: num(2, 1)?,
            new_start: num(3, 0)?,
            new_len: num(4, 1)?,
            section: caps.get(5).map(|m| m.as_str().to_string()).unwrap_or_default(),
            lines: Vec::new(),
        };
        self.pos += 1;

        let (mut old_left, mut new_left) = (hunk.old_len, hunk.new_len);
        let mismatch = |detail: String| err(header_line, DiffErrorKind::CountMismatch(detail));
        while old_left > 0 || new_left > 0 {
            let Some(line) = self.peek() else {
                return Err(mismatch(format!(
                    "input ended with {old_left} old and {new_left} new lines outstanding"
                )));
            };
            let (kind, text) = match line.chars().next() {
                Some(' ') => (LineKind::Context, &line[1..]),
                None => (LineKind::Context, ""),
                Some('-') => (LineKind::Del, &line[1..]),
                Some('+') => (LineKind::Add, &line[1..]),
                Some('\\') => {
                    let last = hunk.lines.last_mut().ok_or_else(|| {
                        mismatch(format!("line {}: marker before any hunk line", self.line_no()))
                    })?;
                    last.no_newline = true;
                    self.pos += 1;
                    continue;
                }
                Some(_) => {
                    return Err(mismatch(format!(
                        "line {}: unexpected line with {old_left} old and {new_left} new lines outstanding",
                        self.line_no()
                    )))
                }
            };
            let (needs_old, needs_new) = match kind {
                LineKind::Context => (true, true),
                LineKind::Del => (true, false),
                LineKind::Add => (false, true),
            };
            if (needs_old && old_left == 0) || (needs_new && new_left == 0) {
                return Err(mismatch(format!(
                    "line {}: more lines than declared",
                    self.line_no()
                )));
            }
            old_left -= u64::from(needs_old);
            new_left -= u64::from(needs_new);
            hunk.lines.push(DiffLine {
                kind,
                text: text.to_string(),
                no_newline: false,
            });
            self.pos += 1;
        }

        if let Some(line) = self.peek() {
            if line.starts_with('\\') {
                if let Some(last) = hunk.lines.last_mut() {
                    last.no_newline = true;
                }
                self.pos += 1;
            }
        }
        // A body line right after a complete hunk means the header under-declared it.
        if let Some(line) = self.peek() {
            let overflow = match line.chars().next() {
                Some('+') => !line.starts_with("+++ "),
                Some('-') => !line.starts_with("--- ") && line != "-- ",
                Some(' ') | Some('\\') => true,
                _ => false,
            };
            if overflow {
                return Err(mismatch(format!(
                    "line {}: more lines than declared",
                    self.line_no()
                )));
            }
        }
        Ok(hunk)
    }
}

/// Parses unified diff text. Never returns a partial result.
pub fn parse_unified_diff(text: &str) -> Result<Diff, DiffError> {
    if text.trim().is_empty() {
        return Err(err(1, DiffErrorKind::EmptyInput));
    }
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    Parser { lines, pos: 0 }.parse()
}

/// Renders a diff back to unified text. Hunk lengths are always written
/// explicitly; `---`/`+++` timestamps are not preserved.
pub fn render_unified_diff(diff: &Diff) -> String {
    diff.to_string()
}

impl fmt::Display for Diff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for file in &self.files {
            for header in &file.extended_headers {
                writeln!(f, "{header}")?;
            }
            if file.hunks.is_empty() {
                continue;
            }
            writeln!(f, "--- {}", file.old_path)?;
            writeln!(f, "+++ {}", file.new_path)?;
            for hunk in &file.hunks {
                write!(
                    f,
                    "@@ -{},{} +{},{} @@",
                    hunk.old_start, hunk.old_len, hunk.new_start, hunk.new_len
                )?;
                if hunk.section.is_empty() {
                    writeln!(f)?;
                } else {
                    writeln!(f, " {}", hunk.section)?;
                }
                for line in &hunk.lines {
                    writeln!(f, "{}{}", line.kind.prefix(), line.text)?;
                    if line.no_newline {
                        writeln!(f, "\\ No newline at end of file")?;
                    }
                }
            }
        }
        Ok(())
    }
}
