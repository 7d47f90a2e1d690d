use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    detect_linked_issues, Comment, Forge, IngestError, Issue, ItemError, PullRequest, RawTriplet,
    RepoStats, TripletStream,
};

/// One repository in an offline forge snapshot.
///
/// Issues and pulls are kept as raw JSON so that a corrupt record surfaces as
/// an item error during harvesting instead of failing the whole snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FixtureRepo {
    pub stats: RepoStats,
    #[serde(default)]
    pub issues: Vec<Value>,
    #[serde(default)]
    pub pulls: Vec<Value>,
}

#[derive(Debug, Deserialize)]
struct FixturePull {
    number: u64,
    #[serde(default)]
    title: String,
    #[serde(default)]
    body: String,
    merged: bool,
    #[serde(default)]
    discussion: Vec<Comment>,
    /// Explicit forge cross-links, on top of keyword detection.
    #[serde(default)]
    cross_links: Vec<u64>,
    diff: String,
}

/// An in-memory forge, loadable from a JSON document `{"repos": [...]}`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct FixtureForge {
    pub repos: Vec<FixtureRepo>,
}

impl FixtureForge {
    pub fn new(repos: Vec<FixtureRepo>) -> Self {
        Self { repos }
    }

    pub fn load(path: &Path) -> Result<Self, IngestError> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => IngestError::MissingFile(path.to_path_buf()),
            _ => IngestError::Io {
                path: path.to_path_buf(),
                source: e,
            },
        })?;
        serde_json::from_str(&text).map_err(|e| IngestError::Payload {
            field: "repos".into(),
            detail: e.to_string(),
        })
    }
}

fn item_error(repo: &str, kind: &str, idx: usize, err: impl std::fmt::Display) -> ItemError {
    ItemError {
        location: format!("{repo} {kind}[{idx}]"),
        message: err.to_string(),
    }
}

impl Forge for FixtureForge {
    fn list_repos(&self, min_stars: u64) -> Result<Vec<RepoStats>, IngestError> {
        Ok(self
            .repos
            .iter()
            .filter(|r| r.stats.stars >= min_stars)
            .map(|r| r.stats.clone())
            .collect())
    }

    fn triplets<'a>(&'a self, repo: &str) -> Result<TripletStream<'a>, IngestError> {
        let entry = self
            .repos
            .iter()
            .find(|r| r.stats.repo == repo)
            .ok_or_else(|| IngestError::NotFound(repo.to_string()))?;
        let slug = entry.stats.repo.clone();

        let mut errors = Vec::new();
        let mut issues: Vec<Issue> = Vec::new();
        for (i, raw) in entry.issues.iter().enumerate() {
            match serde_json::from_value::<Issue>(raw.clone()) {
                Ok(issue) if issue.number > 0 => issues.push(issue),
                Ok(_) => errors.push(item_error(&slug, "issues", i, "issue number must be positive")),
                Err(e) => errors.push(item_error(&slug, "issues", i, e)),
            }
        }

        let mut out: Vec<Result<RawTriplet, ItemError>> = errors.into_iter().map(Err).collect();
        for (i, raw) in entry.pulls.iter().enumerate() {
            let pull = match serde_json::from_value::<FixturePull>(raw.clone()) {
                Ok(p) if p.number > 0 => p,
                Ok(_) => {
                    out.push(Err(item_error(&slug, "pulls", i, "pull number must be positive")));
                    continue;
                }
                Err(e) => {
                    out.push(Err(item_error(&slug, "pulls", i, e)));
                    continue;
                }
            };
            let mut refs = detect_linked_issues(
                std::iter::once(pull.title.as_str())
                    .chain(std::iter::once(pull.body.as_str()))
                    .chain(pull.discussion.iter().map(|c| c.body.as_str())),
            );
            for n in &pull.cross_links {
                if !refs.contains(n) {
                    refs.push(*n);
                }
            }
            for n in &refs {
                let Some(issue) = issues.iter().find(|iss| iss.number == *n) else {
                    continue;
                };
                out.push(Ok(RawTriplet {
                    repo: slug.clone(),
                    issue: issue.clone(),
                    pr: PullRequest {
                        number: pull.number,
                        merged: pull.merged,
                        linked_issue_refs: refs.clone(),
                        discussion: pull.discussion.clone(),
                        title: pull.title.clone(),
                        body: pull.body.clone(),
                    },
                    patch_text: pull.diff.clone(),
                }));
            }
        }
        Ok(Box::new(out.into_iter()))
    }
}
