//! The searching and browsing tools, multi-round sessions, and transfer briefs.
//!
//! [`ToolService`] holds the logic and state; [`router`] exposes it over HTTP.
//! Searching returns index-layer previews only. Resolution-layer content leaves
//! the service through browsing and transfer briefs alone.

mod http;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::card::ExperienceCard;
use crate::index::{Embedder, MemoryStore, SearchError, SearchHit, DEFAULT_TOP_K};

pub use http::{router, serve};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchRequest {
    pub query: String,
    #[serde(default)]
    pub top_k: Option<usize>,
    #[serde(default)]
    pub session_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrowseRequest {
    pub card_id: String,
    #[serde(default)]
    pub session_id: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransferBriefRequest {
    pub session_id: String,
    pub card_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResponse {
    pub hits: Vec<SearchHit>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionCreated {
    pub session_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub card_count: usize,
    pub dimension: usize,
}

/// One tool call recorded in a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Round {
    Search {
        query: String,
        top_k: usize,
        hit_ids: Vec<String>,
        timestamp: DateTime<Utc>,
    },
    Browse {
        card_id: String,
        timestamp: DateTime<Utc>,
    },
}

impl Round {
    pub fn timestamp(&self) -> DateTime<Utc> {
        match self {
            Self::Search { timestamp, .. } | Self::Browse { timestamp, .. } => *timestamp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub session_id: String,
    pub rounds: Vec<Round>,
}

impl SessionLog {
    /// Distinct browsed card ids in order of first browse.
    pub fn browsed(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        for r in &self.rounds {
            if let Round::Browse { card_id, .. } = r {
                if !out.contains(&card_id.as_str()) {
                    out.push(card_id);
                }
            }
        }
        out
    }
}

/// Evidence package handed to an agent: the browsed cards' root causes, fix
/// strategies, and verifications. Mapping it onto the target repository is
/// left to the agent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct TransferBrief {
    pub root_cause_pattern: String,
    pub modification_logic: String,
    pub validation_strategy: String,
    pub source_card_ids: Vec<String>,
}

impl TransferBrief {
    pub fn is_empty(&self) -> bool {
        self.source_card_ids.is_empty()
    }
}

/// Concatenates the cards' resolution fields in the given order, separated by
/// blank lines.
pub fn assemble_brief(cards: &[&ExperienceCard]) -> TransferBrief {
    let join = |f: fn(&ExperienceCard) -> &str| cards.iter().map(|c| f(c)).collect::<Vec<_>>().join("\n\n");
    TransferBrief {
        root_cause_pattern: join(|c| &c.resolution.root_cause),
        modification_logic: join(|c| &c.resolution.fix_strategy),
        validation_strategy: join(|c| &c.resolution.verification),
        source_card_ids: cards.iter().map(|c| c.card_id.clone()).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    InvalidRequest,
    UnembeddableQuery,
    NotFound,
    SessionNotFound,
    NotBrowsed,
    StoreUnavailable,
    Internal,
}

impl ErrorKind {
    pub fn code(self) -> &'static str {
        match self {
            Self::InvalidRequest => "invalid_request",
            Self::UnembeddableQuery => "unembeddable_query",
            Self::NotFound => "not_found",
            Self::SessionNotFound => "session_not_found",
            Self::NotBrowsed => "not_browsed",
            Self::StoreUnavailable => "store_unavailable",
            Self::Internal => "internal",
        }
    }

    pub fn status(self) -> u16 {
        match self {
            Self::InvalidRequest | Self::UnembeddableQuery => 400,
            Self::NotFound | Self::SessionNotFound => 404,
            Self::NotBrowsed => 409,
            Self::StoreUnavailable => 503,
            Self::Internal => 500,
        }
    }

    pub fn is_client_error(self) -> bool {
        self.status() < 500
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}: {message}", kind.code())]
pub struct ToolError {
    pub kind: ErrorKind,
    pub message: String,
}

impl ToolError {
    pub fn new(kind: ErrorKind, message: impl Into<String>) -> Self {
        Self {
            kind,
            message: message.into(),
        }
    }
}

/// Tool state: an immutable store snapshot swapped atomically on reload, and
/// internally synchronized session logs.
pub struct ToolService {
    store: RwLock<Option<Arc<MemoryStore>>>,
    embedder: Arc<dyn Embedder>,
    sessions: Mutex<HashMap<String, SessionLog>>,
}

impl ToolService {
    pub fn new(store: Option<MemoryStore>, embedder: Arc<dyn Embedder>) -> Self {
        Self {
            store: RwLock::new(store.map(Arc::new)),
            embedder,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    /// Replaces the served snapshot. Requests already running keep the old one.
    pub fn swap_store(&self, store: Option<MemoryStore>) {
        *self.store.write().expect("store lock poisoned") = store.map(Arc::new);
    }

    pub fn snapshot(&self) -> Result<Arc<MemoryStore>, ToolError> {
        self.store
            .read()
            .expect("store lock poisoned")
            .clone()
            .ok_or_else(|| ToolError::new(ErrorKind::StoreUnavailable, "no memory store is loaded"))
    }

    pub fn health(&self) -> Health {
        match self.snapshot() {
            Ok(s) => Health {
                status: "ok".into(),
                card_count: s.len(),
                dimension: s.dimension(),
            },
            Err(_) => Health {
                status: "unavailable".into(),
                card_count: 0,
                dimension: self.embedder.dimension(),
            },
        }
    }

    pub fn create_session(&self) -> SessionCreated {
        let session_id = uuid::Uuid::new_v4().to_string();
        self.sessions.lock().expect("session lock poisoned").insert(
            session_id.clone(),
            SessionLog {
                session_id: session_id.clone(),
                rounds: Vec::new(),
            },
        );
        SessionCreated { session_id }
    }

    pub fn session(&self, session_id: &str) -> Result<SessionLog, ToolError> {
        self.sessions
            .lock()
            .expect("session lock poisoned")
            .get(session_id)
            .cloned()
            .ok_or_else(|| unknown_session(session_id))
    }

    fn check_session(&self, session_id: Option<&str>) -> Result<(), ToolError> {
        match session_id {
            Some(id) if !self.sessions.lock().expect("session lock poisoned").contains_key(id) => {
                Err(unknown_session(id))
            }
            _ => Ok(()),
        }
    }

    /// Appends a round stamped no earlier than the session's last round.
    fn record(&self, session_id: Option<&str>, make: impl FnOnce(DateTime<Utc>) -> Round) -> Result<(), ToolError> {
        let Some(id) = session_id else { return Ok(()) };
        let mut sessions = self.sessions.lock().expect("session lock poisoned");
        let log = sessions.get_mut(id).ok_or_else(|| unknown_session(id))?;
        let now = Utc::now();
        let ts = log.rounds.last().map_or(now, |r| r.timestamp().max(now));
        log.rounds.push(make(ts));
        Ok(())
    }

    pub fn search(&self, req: &SearchRequest) -> Result<SearchResponse, ToolError> {
        let k = req.top_k.unwrap_or(DEFAULT_TOP_K);
        if k == 0 {
            return Err(ToolError::new(ErrorKind::InvalidRequest, "top_k must be at least 1"));
        }
        self.check_session(req.session_id.as_deref())?;
        let store = self.snapshot()?;
        let hits = store.search(&req.query, k, self.embedder.as_ref()).map_err(|e| match e {
            SearchError::Unembeddable => ToolError::new(ErrorKind::UnembeddableQuery, e.to_string()),
            SearchError::ZeroK => ToolError::new(ErrorKind::InvalidRequest, e.to_string()),
            other => ToolError::new(ErrorKind::Internal, other.to_string()),
        })?;
        self.record(req.session_id.as_deref(), |timestamp| Round::Search {
            query: req.query.clone(),
            top_k: k,
            hit_ids: hits.iter().map(|h| h.card_id.clone()).collect(),
            timestamp,
        })?;
        Ok(SearchResponse { hits })
    }

    pub fn browse(&self, req: &BrowseRequest) -> Result<ExperienceCard, ToolError> {
        if req.card_id.trim().is_empty() {
            return Err(ToolError::new(ErrorKind::InvalidRequest, "card_id must be non-empty"));
        }
        self.check_session(req.session_id.as_deref())?;
        let store = self.snapshot()?;
        let card = store
            .browse(&req.card_id)
            .map_err(|e| ToolError::new(ErrorKind::NotFound, e.to_string()))?
            .clone();
        self.record(req.session_id.as_deref(), |timestamp| Round::Browse {
            card_id: req.card_id.clone(),
            timestamp,
        })?;
        Ok(card)
    }

    /// Brief over `card_ids`, all of which must have been browsed in the
    /// session; fields follow browse order.
    pub fn transfer_brief(&self, req: &TransferBriefRequest) -> Result<TransferBrief, ToolError> {
        let log = self.session(&req.session_id)?;
        let browsed = log.browsed();
        if let Some(missing) = req.card_ids.iter().find(|id| !browsed.contains(&id.as_str())) {
            return Err(ToolError::new(
                ErrorKind::NotBrowsed,
                format!("card `{missing}` was not browsed in session {}", req.session_id),
            ));
        }
        let store = self.snapshot()?;
        let cards = browsed
            .into_iter()
            .filter(|id| req.card_ids.iter().any(|r| r == id))
            .map(|id| {
                store
                    .browse(id)
                    .map_err(|e| ToolError::new(ErrorKind::NotFound, e.to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(assemble_brief(&cards))
    }
}

fn unknown_session(id: &str) -> ToolError {
    ToolError::new(ErrorKind::SessionNotFound, format!("no session `{id}`"))
}
