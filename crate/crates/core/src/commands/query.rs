use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::govern::{ingest_error, io_error};
use super::{embedder_for, CommandError, PipelineConfig};
use crate::audit::{read_audit_log, AuditLog, AuditRecord};
use crate::card::ExperienceCard;
use crate::index::{load_store, HashingEmbedder, MemoryStore, PersistError, SearchError};
use crate::ingest::{load_fixture_triplets, RepoStats};
use crate::purify::Purification;
use crate::selection::{select_top_m, RepoScore};
use crate::server::SearchResponse;

/// Ranks the repositories in a JSON Lines file of [`RepoStats`].
pub fn select(cfg: &PipelineConfig, stats_path: &Path) -> Result<Vec<RepoScore>, CommandError> {
    let file = std::fs::File::open(stats_path)
        .map_err(|e| CommandError::Data(format!("{}: {e}", stats_path.display())))?;
    let mut stats = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| io_error(stats_path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let s: RepoStats = serde_json::from_str(&line)
            .map_err(|e| CommandError::Data(format!("{}: line {}: {e}", stats_path.display(), i + 1)))?;
        stats.push(s);
    }
    Ok(select_top_m(&stats, &cfg.selection))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct PurifySummary {
    pub read: usize,
    pub accepted: usize,
    /// Rejection counts keyed by reason code (`load` for unreadable lines).
    pub rejected: BTreeMap<String, usize>,
}

/// Instance purification only: counts decisions and writes rejections to the
/// audit log without distilling anything.
pub fn purify_dry_run(cfg: &PipelineConfig, input: &Path, audit_path: &Path) -> Result<PurifySummary, CommandError> {
    let purifier = cfg.purifier()?;
    let records = load_fixture_triplets(input).map_err(|e| ingest_error(input, e))?;
    let audit = AuditLog::create(audit_path).map_err(|e| io_error(audit_path, e))?;
    let mut summary = PurifySummary::default();
    for record in records {
        summary.read += 1;
        let (code, audit_record) = match record {
            Err(e) => (
                "load".to_string(),
                AuditRecord::Load {
                    location: format!("{}:{}", input.display(), e.location),
                    reason: e.message,
                },
            ),
            Ok(t) => {
                let source = t.source();
                match purifier.purify(t) {
                    Purification::Accepted(_) => {
                        summary.accepted += 1;
                        continue;
                    }
                    Purification::Rejected { reason, .. } => (
                        reason.code().to_string(),
                        AuditRecord::purification(&source, format!("{}: {reason}", reason.code())),
                    ),
                }
            }
        };
        *summary.rejected.entry(code).or_default() += 1;
        audit.append(&audit_record).map_err(|e| io_error(audit_path, e))?;
    }
    audit.flush().map_err(|e| io_error(audit_path, e))?;
    Ok(summary)
}

/// Loads a store and the bundled embedder that produced it.
pub fn open_store(dir: &Path) -> Result<(MemoryStore, HashingEmbedder), CommandError> {
    let store = load_store(dir).map_err(|e| match e {
        PersistError::Io { .. } => CommandError::Infra(format!("loading {}: {e}", dir.display())),
        other => CommandError::Data(format!("loading {}: {other}", dir.display())),
    })?;
    let embedder = embedder_for(Some(store.embedder_id()), store.dimension())
        .map_err(|e| CommandError::Data(format!("{}: {e}", dir.display())))?;
    Ok((store, embedder))
}

pub fn search(dir: &Path, query: &str, top_k: usize) -> Result<SearchResponse, CommandError> {
    let (store, embedder) = open_store(dir)?;
    let hits = store.search(query, top_k, &embedder).map_err(|e| match e {
        SearchError::Unembeddable | SearchError::ZeroK => CommandError::Data(e.to_string()),
        other => CommandError::Infra(other.to_string()),
    })?;
    Ok(SearchResponse { hits })
}

pub fn browse(dir: &Path, card_id: &str) -> Result<ExperienceCard, CommandError> {
    let (store, _) = open_store(dir)?;
    store
        .browse(card_id)
        .cloned()
        .map_err(|e| CommandError::Data(e.to_string()))
}

pub fn format_search(res: &SearchResponse) -> String {
    if res.hits.is_empty() {
        return "no results\n".into();
    }
    let mut out = String::new();
    for (rank, h) in res.hits.iter().enumerate() {
        let _ = writeln!(out, "{:>3}. {}  {:.4}  {}", rank + 1, h.card_id, h.similarity, h.preview.problem_summary);
        let _ = writeln!(out, "     signals: {}", h.preview.signals.join("; "));
    }
    out
}

pub fn format_card(card: &ExperienceCard) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{}  ({})", card.card_id, card.source);
    let _ = writeln!(out, "\nproblem summary:\n  {}", card.index.problem_summary);
    let _ = writeln!(out, "\nsignals:\n  {}", card.index.signals.join("; "));
    for (title, body) in [
        ("root cause", &card.resolution.root_cause),
        ("fix strategy", &card.resolution.fix_strategy),
        ("patch digest", &card.resolution.patch_digest),
        ("verification", &card.resolution.verification),
    ] {
        let _ = writeln!(out, "\n{title}:");
        for line in body.lines() {
            let _ = writeln!(out, "  {line}");
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub card_count: usize,
    pub dimension: usize,
    pub embedder_id: String,
    pub repositories: usize,
    pub mean_signals: f64,
    /// Audit records by stage, when an audit log was given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub audit: Option<BTreeMap<String, usize>>,
}

pub fn stats(dir: &Path, audit_path: Option<&Path>) -> Result<Stats, CommandError> {
    let (store, _) = open_store(dir)?;
    let cards = store.cards();
    let mut repos: Vec<&str> = cards.iter().map(|c| c.source.repo.as_str()).collect();
    repos.sort_unstable();
    repos.dedup();
    let signals: usize = cards.iter().map(|c| c.index.signals.len()).sum();
    let audit = match audit_path {
        None => None,
        Some(p) => {
            let records = read_audit_log(p).map_err(|e| CommandError::Data(format!("{}: {e}", p.display())))?;
            let mut by_stage = BTreeMap::new();
            for r in records {
                let stage = match r {
                    AuditRecord::Load { .. } => "load",
                    AuditRecord::Purification { .. } => "purification",
                    AuditRecord::Distillation { .. } => "distillation",
                    AuditRecord::Qc { accepted: true, .. } => "qc_accepted",
                    AuditRecord::Qc { .. } => "qc_rejected",
                    AuditRecord::Dedup { .. } => "dedup",
                    AuditRecord::Index { .. } => "index",
                };
                *by_stage.entry(stage.to_string()).or_default() += 1;
            }
            Some(by_stage)
        }
    };
    Ok(Stats {
        card_count: store.len(),
        dimension: store.dimension(),
        embedder_id: store.embedder_id().to_string(),
        repositories: repos.len(),
        mean_signals: if cards.is_empty() { 0.0 } else { signals as f64 / cards.len() as f64 },
        audit,
    })
}
