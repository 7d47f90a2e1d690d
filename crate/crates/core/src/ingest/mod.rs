//! Repository metadata and (Issue, PR, Patch) triplet acquisition.
//!
//! Everything downstream consumes [`RawTriplet`]s. They come either from a
//! [`Forge`] implementation (the GitHub-compatible REST client or the offline
//! [`FixtureForge`]) or straight from a JSON Lines fixture file via
//! [`load_fixture_triplets`].

mod fixture;
mod github;
mod linkage;

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fixture::{FixtureForge, FixtureRepo};
pub use github::{GithubForge, ENV_FORGE_BASE_URL, ENV_FORGE_TOKEN};
pub use linkage::detect_linked_issues;

pub const DEFAULT_MIN_STARS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepoStats {
    pub repo: String,
    pub stars: u64,
    pub issues: u64,
    pub pulls: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AuthorRole {
    Maintainer,
    Contributor,
    Bot,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Comment {
    pub author_role: AuthorRole,
    pub body: String,
    pub timestamp: DateTime<Utc>,
}

impl Comment {
    pub fn new(author_role: AuthorRole, body: impl Into<String>) -> Self {
        Self {
            author_role,
            body: body.into(),
            timestamp: DateTime::<Utc>::UNIX_EPOCH,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Issue {
    pub number: u64,
    pub title: String,
    pub body: String,
    #[serde(default)]
    pub comments: Vec<Comment>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PullRequest {
    pub number: u64,
    pub merged: bool,
    pub linked_issue_refs: Vec<u64>,
    #[serde(default)]
    pub discussion: Vec<Comment>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub title: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub body: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawTriplet {
    pub repo: String,
    pub issue: Issue,
    pub pr: PullRequest,
    pub patch_text: String,
}

impl RawTriplet {
    /// Issue comments followed by PR discussion.
    pub fn thread(&self) -> impl Iterator<Item = &Comment> {
        self.issue.comments.iter().chain(self.pr.discussion.iter())
    }

    pub fn source(&self) -> crate::card::CardSource {
        crate::card::CardSource {
            repo: self.repo.clone(),
            issue: self.issue.number,
            pr: self.pr.number,
        }
    }

    /// Checks the type-level invariants that serde cannot express.
    pub fn check(&self) -> Result<(), String> {
        if self.repo.trim().is_empty() {
            return Err("repo is empty".into());
        }
        if self.issue.number == 0 {
            return Err("issue.number must be positive".into());
        }
        if self.pr.number == 0 {
            return Err("pr.number must be positive".into());
        }
        let thread = self
            .issue
            .comments
            .iter()
            .map(|c| ("issue.comments", c))
            .chain(self.pr.discussion.iter().map(|c| ("pr.discussion", c)));
        for (field, c) in thread {
            if c.body.trim().is_empty() && c.author_role != AuthorRole::Bot {
                return Err(format!("{field}: empty comment body from a non-bot author"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("source unavailable (retryable): {0}")]
    Source(String),
    #[error("malformed payload field `{field}`: {detail}")]
    Payload { field: String, detail: String },
    #[error("fixture file not found: {0}")]
    MissingFile(PathBuf),
    #[error("reading {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("not found at source: {0}")]
    NotFound(String),
}

impl IngestError {
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::Source(_))
    }
}

/// A per-record failure that does not end the stream.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{location}: {message}")]
pub struct ItemError {
    pub location: String,
    pub message: String,
}

impl ItemError {
    pub fn at_line(line: usize, message: impl Into<String>) -> Self {
        Self {
            location: format!("line {line}"),
            message: message.into(),
        }
    }
}

pub type TripletStream<'a> = Box<dyn Iterator<Item = Result<RawTriplet, ItemError>> + Send + 'a>;

/// A source of repository metadata and repair records.
pub trait Forge: Send + Sync {
    /// Candidate repositories with at least `min_stars` stars, as far as the
    /// source can pre-filter. Callers re-check the bound.
    fn list_repos(&self, min_stars: u64) -> Result<Vec<RepoStats>, IngestError>;

    /// Every (issue, PR, patch) pairing the source knows for `repo`.
    fn triplets<'a>(&'a self, repo: &str) -> Result<TripletStream<'a>, IngestError>;
}

pub fn fetch_repo_stats(source: &dyn Forge, min_stars: u64) -> Result<Vec<RepoStats>, IngestError> {
    let mut repos = source.list_repos(min_stars)?;
    repos.retain(|r| r.stars >= min_stars);
    Ok(repos)
}

/// Harvests triplets for one repository.
///
/// Triplets whose PR does not reference the issue are dropped here, whatever
/// the source produced.
pub fn harvest_triplets<'a>(source: &'a dyn Forge, repo: &str) -> Result<TripletStream<'a>, IngestError> {
    let stream = source.triplets(repo)?;
    Ok(Box::new(stream.filter(|item| match item {
        Ok(t) => t.pr.linked_issue_refs.contains(&t.issue.number),
        Err(_) => true,
    })))
}

/// Streams triplets from a JSON Lines file, one object per line.
///
/// Blank lines are skipped. A line that fails to parse or violates the
/// triplet invariants yields an [`ItemError`] naming its 1-based line number.
pub fn load_fixture_triplets(
    path: &Path,
) -> Result<impl Iterator<Item = Result<RawTriplet, ItemError>>, IngestError> {
    let file = File::open(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => IngestError::MissingFile(path.to_path_buf()),
        _ => IngestError::Io {
            path: path.to_path_buf(),
            source: e,
        },
    })?;
    let lines = BufReader::new(file).lines();
    Ok(lines.enumerate().filter_map(|(i, line)| {
        let line_no = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some(Err(ItemError::at_line(line_no, e.to_string()))),
        };
        if line.trim().is_empty() {
            return None;
        }
        Some(parse_triplet_line(&line).map_err(|m| ItemError::at_line(line_no, m)))
    }))
}

pub fn parse_triplet_line(line: &str) -> Result<RawTriplet, String> {
    let triplet: RawTriplet = serde_json::from_str(line).map_err(|e| e.to_string())?;
    triplet.check()?;
    Ok(triplet)
}
