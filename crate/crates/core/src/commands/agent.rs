//! Scripted reference search policy, run in-process against the tool service.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::CommandError;
use crate::distill::stub::{excerpt_tokens, word_tokens};
use crate::index::{tokens, HashingEmbedder, MemoryStore};
use crate::purify::anchors::excerpts;
use crate::purify::Purifier;
use crate::server::{
    BrowseRequest, ErrorKind, SearchRequest, ToolService, TransferBrief, TransferBriefRequest,
};

/// Below this best similarity the policy refines its query. Illustrative, not tuned.
pub const REFINE_THRESHOLD: f64 = 0.3;
pub const DEFAULT_ROUNDS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentRound {
    pub query: String,
    pub best_similarity: Option<f64>,
    pub hit_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentTrace {
    pub session_id: String,
    pub rounds: Vec<AgentRound>,
    pub browsed: Vec<String>,
    pub brief: TransferBrief,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// The first non-blank line is the title; anchors are searched in the whole text.
fn query_parts(issue_text: &str, purifier: &Purifier) -> (Vec<String>, Vec<String>) {
    let title = issue_text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let mut anchors: Vec<String> = Vec::new();
    for t in excerpt_tokens(excerpts(issue_text, purifier.anchor_patterns())) {
        if !anchors.contains(&t) {
            anchors.push(t);
        }
    }
    (word_tokens(title), anchors)
}

/// Searches with title and anchor tokens. While the best similarity stays
/// under [`REFINE_THRESHOLD`], appends the next anchor token absent from the
/// best hit's preview and searches again, for at most `rounds` searches. Then
/// browses the top hit and assembles a transfer brief from it, or returns an
/// empty brief with a warning if nothing cleared the threshold.
pub fn demo_agent(
    store: MemoryStore,
    embedder: HashingEmbedder,
    issue_text: &str,
    rounds: usize,
) -> Result<AgentTrace, CommandError> {
    if rounds == 0 {
        return Err(CommandError::Usage("--rounds must be at least 1".into()));
    }
    let purifier = Purifier::default();
    let (title, anchors) = query_parts(issue_text, &purifier);
    let mut query = title.iter().chain(&anchors).cloned().collect::<Vec<_>>().join(" ");
    if query.is_empty() {
        return Err(CommandError::Data("issue text has nothing to search for".into()));
    }

    let svc = ToolService::new(Some(store), Arc::new(embedder));
    let session_id = svc.create_session().session_id;
    let mut trace = AgentTrace {
        session_id: session_id.clone(),
        rounds: Vec::new(),
        browsed: Vec::new(),
        brief: TransferBrief::default(),
        warning: None,
    };
    let mut appended: Vec<String> = Vec::new();
    let mut top = None;
    for _ in 0..rounds {
        let res = svc
            .search(&SearchRequest {
                query: query.clone(),
                top_k: None,
                session_id: Some(session_id.clone()),
            })
            .map_err(|e| match e.kind {
                ErrorKind::UnembeddableQuery => CommandError::Data(e.message),
                _ => CommandError::Infra(e.to_string()),
            })?;
        let best = res.hits.first().cloned();
        trace.rounds.push(AgentRound {
            query: query.clone(),
            best_similarity: best.as_ref().map(|h| h.similarity),
            hit_ids: res.hits.iter().map(|h| h.card_id.clone()).collect(),
        });
        let Some(best) = best else { break };
        if best.similarity >= REFINE_THRESHOLD {
            top = Some(best.card_id);
            break;
        }
        let seen: Vec<String> = tokens(&format!("{}\n{}", best.preview.problem_summary, best.preview.signals.join(" "))).collect();
        let next = anchors.iter().find(|t| !seen.contains(t) && !appended.contains(t));
        match next {
            Some(t) => {
                appended.push(t.clone());
                query.push(' ');
                query.push_str(t);
            }
            None => break,
        }
    }

    match top {
        Some(card_id) => {
            svc.browse(&BrowseRequest {
                card_id: card_id.clone(),
                session_id: Some(session_id.clone()),
            })
            .map_err(|e| CommandError::Infra(e.to_string()))?;
            trace.brief = svc
                .transfer_brief(&TransferBriefRequest {
                    session_id,
                    card_ids: vec![card_id.clone()],
                })
                .map_err(|e| CommandError::Infra(e.to_string()))?;
            trace.browsed.push(card_id);
        }
        None => {
            trace.warning = Some(format!(
                "no card reached similarity {REFINE_THRESHOLD} after {} round(s); brief is empty",
                trace.rounds.len()
            ));
        }
    }
    Ok(trace)
}

pub fn format_trace(trace: &AgentTrace) -> String {
    let mut out = String::new();
    for (i, r) in trace.rounds.iter().enumerate() {
        let best = r.best_similarity.map_or("-".to_string(), |s| format!("{s:.4}"));
        let _ = writeln!(out, "round {}: best {best}  query: {}", i + 1, r.query);
        if let Some(id) = r.hit_ids.first() {
            let _ = writeln!(out, "  top hit {id}");
        }
    }
    for id in &trace.browsed {
        let _ = writeln!(out, "browsed {id}");
    }
    if trace.brief.is_empty() {
        let _ = writeln!(out, "\ntransfer brief: (empty)");
    } else {
        let b = &trace.brief;
        let _ = writeln!(out, "\nroot cause pattern:\n{}", b.root_cause_pattern);
        let _ = writeln!(out, "\nmodification logic:\n{}", b.modification_logic);
        let _ = writeln!(out, "\nvalidation strategy:\n{}", b.validation_strategy);
        let _ = writeln!(out, "\nsources: {}", b.source_card_ids.join(", "));
    }
    out
}
