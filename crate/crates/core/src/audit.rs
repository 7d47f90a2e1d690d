//! JSON Lines audit trail of per-item pipeline decisions.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::card::CardSource;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "stage", rename_all = "snake_case")]
pub enum AuditRecord {
    /// An input line that could not be read as a triplet.
    Load { location: String, reason: String },
    Purification {
        repo: String,
        issue: u64,
        pr: u64,
        reason: String,
    },
    /// A provider failure that survived retries.
    Distillation {
        repo: String,
        issue: u64,
        pr: u64,
        reason: String,
    },
    /// The final QC decision for one instance.
    Qc {
        repo: String,
        issue: u64,
        pr: u64,
        iteration: u32,
        aggregate: f64,
        accepted: bool,
    },
    Dedup {
        repo: String,
        issue: u64,
        pr: u64,
        card_id: String,
        duplicate_of: String,
    },
    Index {
        repo: String,
        issue: u64,
        pr: u64,
        card_id: String,
        reason: String,
    },
}

impl AuditRecord {
    pub fn purification(source: &CardSource, reason: impl Into<String>) -> Self {
        Self::Purification {
            repo: source.repo.clone(),
            issue: source.issue,
            pr: source.pr,
            reason: reason.into(),
        }
    }

    pub fn distillation(source: &CardSource, reason: impl Into<String>) -> Self {
        Self::Distillation {
            repo: source.repo.clone(),
            issue: source.issue,
            pr: source.pr,
            reason: reason.into(),
        }
    }

    pub fn qc(source: &CardSource, iteration: u32, aggregate: f64, accepted: bool) -> Self {
        Self::Qc {
            repo: source.repo.clone(),
            issue: source.issue,
            pr: source.pr,
            iteration,
            aggregate,
            accepted,
        }
    }

    /// Whether this record removes its item from the pipeline.
    pub fn is_rejection(&self) -> bool {
        !matches!(self, Self::Qc { accepted: true, .. })
    }
}

/// Append-only audit sink, safe to share between workers.
pub struct AuditLog {
    out: Mutex<Box<dyn Write + Send>>,
}

impl std::fmt::Debug for AuditLog {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("AuditLog")
    }
}

impl AuditLog {
    /// Creates or truncates the log file.
    pub fn create(path: &Path) -> io::Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        Ok(Self::to_writer(BufWriter::new(File::create(path)?)))
    }

    pub fn to_writer(w: impl Write + Send + 'static) -> Self {
        Self {
            out: Mutex::new(Box::new(w)),
        }
    }

    pub fn discard() -> Self {
        Self::to_writer(io::sink())
    }

    pub fn append(&self, record: &AuditRecord) -> io::Result<()> {
        let line = serde_json::to_string(record).map_err(io::Error::other)?;
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        writeln!(out, "{line}")
    }

    pub fn flush(&self) -> io::Result<()> {
        self.out.lock().unwrap_or_else(|e| e.into_inner()).flush()
    }
}

pub fn read_audit_log(path: &Path) -> io::Result<Vec<AuditRecord>> {
    BufReader::new(File::open(path)?)
        .lines()
        .filter(|l| !matches!(l, Ok(s) if s.trim().is_empty()))
        .map(|l| serde_json::from_str(&l?).map_err(io::Error::other))
        .collect()
}
