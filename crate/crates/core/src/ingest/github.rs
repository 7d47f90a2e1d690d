//! GitHub-compatible REST forge client.
//!
//! Blocking, paginated, with exponential backoff on transport failures, 429
//! and 5xx responses. Point `MEMGOV_FORGE_BASE_URL` at a test server to run
//! against something other than api.github.com.

use std::time::Duration;

use chrono::{DateTime, Utc};
use serde_json::Value;
use ureq::Agent;

use super::{
    detect_linked_issues, AuthorRole, Comment, Forge, IngestError, Issue, ItemError, PullRequest,
    RawTriplet, RepoStats, TripletStream,
};
use crate::retry::RetryPolicy;

pub const ENV_FORGE_TOKEN: &str = "MEMGOV_FORGE_TOKEN";
pub const ENV_FORGE_BASE_URL: &str = "MEMGOV_FORGE_BASE_URL";
const DEFAULT_BASE_URL: &str = "https://api.github.com";
const PER_PAGE: usize = 100;

pub struct GithubForge {
    agent: Agent,
    base_url: String,
    token: Option<String>,
    /// Explicit repositories to consider; empty means "ask the search API".
    candidates: Vec<String>,
    retry: RetryPolicy,
    max_pages: usize,
}

enum Fetch {
    Json(Value),
    Text(String),
}

impl GithubForge {
    pub fn new(base_url: impl Into<String>, token: Option<String>) -> Self {
        let config = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build();
        Self {
            agent: config.into(),
            base_url: base_url.into().trim_end_matches('/').to_string(),
            token,
            candidates: Vec::new(),
            retry: RetryPolicy::default(),
            max_pages: 50,
        }
    }

    /// Reads `MEMGOV_FORGE_BASE_URL` and `MEMGOV_FORGE_TOKEN`.
    pub fn from_env() -> Self {
        let base = std::env::var(ENV_FORGE_BASE_URL).unwrap_or_else(|_| DEFAULT_BASE_URL.into());
        Self::new(base, std::env::var(ENV_FORGE_TOKEN).ok())
    }

    pub fn with_candidates(mut self, repos: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.candidates = repos.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_max_pages(mut self, pages: usize) -> Self {
        self.max_pages = pages.max(1);
        self
    }

    fn fetch(&self, path: &str, accept: &str) -> Result<Fetch, IngestError> {
        let url = format!("{}{}", self.base_url, path);
        // (retryable, error)
        let attempt = || -> Result<Fetch, (bool, IngestError)> {
            let mut req = self
                .agent
                .get(&url)
                .header("Accept", accept)
                .header("User-Agent", "memgov");
            if let Some(token) = &self.token {
                req = req.header("Authorization", &format!("Bearer {token}"));
            }
            let source = |msg: String| (true, IngestError::Source(msg));
            let mut resp = req.call().map_err(|e| source(format!("GET {url}: {e}")))?;
            let status = resp.status().as_u16();
            match status {
                200..=299 => {}
                404 => return Err((false, IngestError::NotFound(path.to_string()))),
                429 | 500..=599 => return Err(source(format!("GET {url}: HTTP {status}"))),
                _ => {
                    return Err((false, IngestError::Source(format!("GET {url}: HTTP {status}"))))
                }
            }
            let body = resp
                .body_mut()
                .read_to_string()
                .map_err(|e| source(format!("GET {url}: {e}")))?;
            if accept.contains("json") {
                serde_json::from_str(&body).map(Fetch::Json).map_err(|e| {
                    (
                        false,
                        IngestError::Payload {
                            field: path.to_string(),
                            detail: e.to_string(),
                        },
                    )
                })
            } else {
                Ok(Fetch::Text(body))
            }
        };
        self.retry.run(attempt, |(retryable, _)| *retryable).map_err(|(_, e)| e)
    }

    fn get_json(&self, path: &str) -> Result<Value, IngestError> {
        match self.fetch(path, "application/vnd.github+json")? {
            Fetch::Json(v) => Ok(v),
            Fetch::Text(_) => unreachable!("json accept header"),
        }
    }

    fn get_diff(&self, path: &str) -> Result<String, IngestError> {
        match self.fetch(path, "application/vnd.github.v3.diff")? {
            Fetch::Text(t) => Ok(t),
            Fetch::Json(_) => unreachable!("diff accept header"),
        }
    }

    /// Fetches every page of a list endpoint.
    fn get_all(&self, path: &str) -> Result<Vec<Value>, IngestError> {
        let sep = if path.contains('?') { '&' } else { '?' };
        let mut out = Vec::new();
        for page in 1..=self.max_pages {
            let v = self.get_json(&format!("{path}{sep}per_page={PER_PAGE}&page={page}"))?;
            let items = v.as_array().cloned().ok_or_else(|| IngestError::Payload {
                field: path.to_string(),
                detail: "expected an array".into(),
            })?;
            let n = items.len();
            out.extend(items);
            if n < PER_PAGE {
                break;
            }
        }
        Ok(out)
    }

    fn count(&self, query: &str) -> Result<u64, IngestError> {
        let v = self.get_json(&format!("/search/issues?q={query}&per_page=1"))?;
        field_u64(&v, "total_count")
    }

    fn comments(&self, repo: &str, number: u64) -> Result<Vec<Comment>, IngestError> {
        let raw = self.get_all(&format!("/repos/{repo}/issues/{number}/comments"))?;
        let mut out = Vec::with_capacity(raw.len());
        for c in &raw {
            let body = c.get("body").and_then(Value::as_str).unwrap_or_default().to_string();
            let role = author_role(c);
            if body.trim().is_empty() && role != AuthorRole::Bot {
                continue;
            }
            out.push(Comment {
                author_role: role,
                body,
                timestamp: parse_time(c.get("created_at")),
            });
        }
        Ok(out)
    }

    fn issue(&self, repo: &str, number: u64) -> Result<Option<Issue>, IngestError> {
        let v = match self.get_json(&format!("/repos/{repo}/issues/{number}")) {
            Ok(v) => v,
            Err(IngestError::NotFound(_)) => return Ok(None),
            Err(e) => return Err(e),
        };
        if v.get("pull_request").is_some() {
            return Ok(None);
        }
        Ok(Some(Issue {
            number,
            title: field_str(&v, "title")?,
            body: v.get("body").and_then(Value::as_str).unwrap_or_default().to_string(),
            comments: self.comments(repo, number)?,
        }))
    }

    /// Triplets for one merged pull request; unmerged pulls yield nothing.
    fn pull_triplets(&self, repo: &str, pull: &Value) -> Result<Vec<RawTriplet>, IngestError> {
        let number = field_u64(pull, "number")?;
        let merged = pull.get("merged_at").is_some_and(|m| !m.is_null());
        if !merged {
            return Ok(Vec::new());
        }
        let title = pull.get("title").and_then(Value::as_str).unwrap_or_default().to_string();
        let body = pull.get("body").and_then(Value::as_str).unwrap_or_default().to_string();
        let discussion = self.comments(repo, number)?;
        let refs = detect_linked_issues(
            [title.as_str(), body.as_str()]
                .into_iter()
                .chain(discussion.iter().map(|c| c.body.as_str())),
        );
        if refs.is_empty() {
            return Ok(Vec::new());
        }
        let patch_text = self.get_diff(&format!("/repos/{repo}/pulls/{number}"))?;
        let mut out = Vec::new();
        for n in &refs {
            let Some(issue) = self.issue(repo, *n)? else {
                continue;
            };
            out.push(RawTriplet {
                repo: repo.to_string(),
                issue,
                pr: PullRequest {
                    number,
                    merged,
                    linked_issue_refs: refs.clone(),
                    discussion: discussion.clone(),
                    title: title.clone(),
                    body: body.clone(),
                },
                patch_text: patch_text.clone(),
            });
        }
        Ok(out)
    }
}

fn field_u64(v: &Value, field: &str) -> Result<u64, IngestError> {
    v.get(field).and_then(Value::as_u64).ok_or_else(|| IngestError::Payload {
        field: field.to_string(),
        detail: "missing or not a non-negative integer".into(),
    })
}

fn field_str(v: &Value, field: &str) -> Result<String, IngestError> {
    v.get(field)
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| IngestError::Payload {
            field: field.to_string(),
            detail: "missing or not a string".into(),
        })
}

fn parse_time(v: Option<&Value>) -> DateTime<Utc> {
    v.and_then(Value::as_str)
        .and_then(|s| DateTime::parse_from_rfc3339(s).ok())
        .map(|t| t.with_timezone(&Utc))
        .unwrap_or(DateTime::<Utc>::UNIX_EPOCH)
}

fn author_role(comment: &Value) -> AuthorRole {
    let is_bot = comment
        .pointer("/user/type")
        .and_then(Value::as_str)
        .is_some_and(|t| t.eq_ignore_ascii_case("bot"));
    if is_bot {
        return AuthorRole::Bot;
    }
    match comment.get("author_association").and_then(Value::as_str) {
        Some("OWNER" | "MEMBER" | "COLLABORATOR") => AuthorRole::Maintainer,
        Some("CONTRIBUTOR" | "FIRST_TIME_CONTRIBUTOR") => AuthorRole::Contributor,
        _ => AuthorRole::Unknown,
    }
}

impl Forge for GithubForge {
    fn list_repos(&self, min_stars: u64) -> Result<Vec<RepoStats>, IngestError> {
        let slugs = if self.candidates.is_empty() {
            let v = self.get_json(&format!(
                "/search/repositories?q=stars:%3E%3D{min_stars}&sort=stars&order=desc&per_page={PER_PAGE}"
            ))?;
            let items = v.get("items").and_then(Value::as_array).ok_or_else(|| IngestError::Payload {
                field: "items".into(),
                detail: "missing search result list".into(),
            })?;
            items
                .iter()
                .map(|i| field_str(i, "full_name"))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            self.candidates.clone()
        };

        let mut out = Vec::new();
        for repo in slugs {
            let meta = self.get_json(&format!("/repos/{repo}"))?;
            let stars = field_u64(&meta, "stargazers_count")?;
            if stars < min_stars {
                continue;
            }
            out.push(RepoStats {
                issues: self.count(&format!("repo:{repo}+is:issue"))?,
                pulls: self.count(&format!("repo:{repo}+is:pr"))?,
                repo,
                stars,
            });
        }
        Ok(out)
    }

    fn triplets<'a>(&'a self, repo: &str) -> Result<TripletStream<'a>, IngestError> {
        let repo = repo.to_string();
        // Probe first so an unreachable source fails the call, not the stream.
        self.get_json(&format!("/repos/{repo}"))?;
        let pages = PullPages {
            forge: self,
            repo,
            page: 0,
            done: false,
            buffer: Vec::new(),
        };
        Ok(Box::new(pages))
    }
}

/// Lazily walks closed pull requests page by page.
struct PullPages<'a> {
    forge: &'a GithubForge,
    repo: String,
    page: usize,
    done: bool,
    buffer: Vec<Result<RawTriplet, ItemError>>,
}

impl PullPages<'_> {
    fn refill(&mut self) {
        self.page += 1;
        if self.page > self.forge.max_pages {
            self.done = true;
            return;
        }
        let path = format!(
            "/repos/{}/pulls?state=closed&per_page={PER_PAGE}&page={}",
            self.repo, self.page
        );
        let pulls = match self.forge.get_json(&path) {
            Ok(Value::Array(items)) => items,
            Ok(_) => {
                self.done = true;
                self.buffer.push(Err(ItemError {
                    location: path,
                    message: "expected an array".into(),
                }));
                return;
            }
            Err(e) => {
                self.done = true;
                self.buffer.push(Err(ItemError {
                    location: path,
                    message: e.to_string(),
                }));
                return;
            }
        };
        if pulls.len() < PER_PAGE {
            self.done = true;
        }
        let mut batch = Vec::new();
        for pull in &pulls {
            match self.forge.pull_triplets(&self.repo, pull) {
                Ok(ts) => batch.extend(ts.into_iter().map(Ok)),
                Err(e) => batch.push(Err(ItemError {
                    location: format!(
                        "{} pull {}",
                        self.repo,
                        pull.get("number").and_then(Value::as_u64).unwrap_or(0)
                    ),
                    message: e.to_string(),
                })),
            }
        }
        batch.reverse();
        self.buffer = batch;
    }
}

impl Iterator for PullPages<'_> {
    type Item = Result<RawTriplet, ItemError>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            if let Some(item) = self.buffer.pop() {
                return Some(item);
            }
            if self.done {
                return None;
            }
            self.refill();
        }
    }
}
