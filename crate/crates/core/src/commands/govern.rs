use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CommandError, PipelineConfig};
use crate::audit::{AuditLog, AuditRecord};
use crate::card::ExperienceCard;
use crate::distill::{purify_content, DistillError};
use crate::index::{dedup_detailed, save_store, MemoryStore};
use crate::ingest::{load_fixture_triplets, IngestError, RawTriplet};
use crate::purify::{Purification, Purifier};
use crate::qc::{refine_loop, QcError, RefineOutcome};

pub const AUDIT_FILE: &str = "audit.jsonl";

#[derive(Debug, Clone, Default)]
pub struct GovernOptions {
    pub input: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub audit_log: Option<PathBuf>,
    /// Worker threads for the per-instance stages; 0 uses every core.
    pub workers: usize,
    pub fixture_mode: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct GovernSummary {
    /// Input records, readable or not.
    pub read: usize,
    pub purified: usize,
    /// Instances for which the distiller produced at least one draft.
    pub distilled: usize,
    pub qc_accepted: usize,
    /// Accepted cards removed as duplicates.
    pub deduped: usize,
    pub indexed: usize,
}

/// What happened to one input record before deduplication.
enum ItemOutcome {
    Unreadable(AuditRecord),
    Rejected(AuditRecord),
    /// Unusable provider output that survived the re-request.
    Malformed(AuditRecord),
    ProviderFailed(AuditRecord),
    Refined { card: Option<Box<ExperienceCard>>, record: AuditRecord },
}

fn process(triplet: RawTriplet, purifier: &Purifier, cfg: &PipelineConfig, stages: &Stages) -> ItemOutcome {
    let source = triplet.source();
    let instance = match purifier.purify(triplet) {
        Purification::Accepted(i) => i,
        Purification::Rejected { reason, .. } => {
            return ItemOutcome::Rejected(AuditRecord::purification(
                &source,
                format!("{}: {reason}", reason.code()),
            ))
        }
    };
    let condensed = purify_content(&instance, purifier.classifier());
    match refine_loop(&instance, &condensed, stages.0.as_ref(), stages.1.as_ref(), &cfg.qc) {
        Ok(RefineOutcome::Accepted { card, report }) => ItemOutcome::Refined {
            card: Some(Box::new(card)),
            record: AuditRecord::qc(&source, report.iteration, report.aggregate, true),
        },
        Ok(RefineOutcome::Rejected { report, .. }) => ItemOutcome::Refined {
            card: None,
            record: AuditRecord::qc(&source, report.iteration, report.aggregate, false),
        },
        Err(e @ (QcError::Malformed(_) | QcError::Distill(DistillError::Malformed(_)))) => {
            ItemOutcome::Malformed(AuditRecord::distillation(&source, e.to_string()))
        }
        Err(e) => ItemOutcome::ProviderFailed(AuditRecord::distillation(&source, e.to_string())),
    }
}

pub type Stages = (
    std::sync::Arc<dyn crate::distill::Distiller>,
    std::sync::Arc<dyn crate::qc::Evaluator>,
);

/// purify → distill/refine → dedup → index → save.
///
/// Per-item rejections are written to the audit log, in input order, and
/// counted; only infrastructure failures end the run with an error. Every
/// input record ends up either indexed or in the audit log as a rejection.
pub fn govern(cfg: &PipelineConfig, opts: &GovernOptions) -> Result<GovernSummary, CommandError> {
    let input = opts
        .input
        .clone()
        .or_else(|| cfg.paths.input.clone())
        .ok_or_else(|| CommandError::Usage("no input file given".into()))?;
    let output_dir = opts
        .output_dir
        .clone()
        .or_else(|| cfg.paths.output_dir.clone())
        .ok_or_else(|| CommandError::Usage("no output directory given".into()))?;
    let audit_path = opts
        .audit_log
        .clone()
        .or_else(|| cfg.paths.audit_log.clone())
        .unwrap_or_else(|| output_dir.join(AUDIT_FILE));

    let purifier = cfg.purifier()?;
    let embedder = cfg.embedder()?;
    let stages = cfg.stages(opts.fixture_mode)?;

    let records: Vec<_> = load_fixture_triplets(&input).map_err(|e| ingest_error(&input, e))?.collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers)
        .build()
        .map_err(|e| CommandError::Infra(format!("worker pool: {e}")))?;
    let outcomes: Vec<ItemOutcome> = pool.install(|| {
        records
            .into_par_iter()
            .map(|r| match r {
                Ok(t) => process(t, &purifier, cfg, &stages),
                Err(e) => ItemOutcome::Unreadable(AuditRecord::Load {
                    location: format!("{}:{}", input.display(), e.location),
                    reason: e.message,
                }),
            })
            .collect()
    });

    let audit = AuditLog::create(&audit_path).map_err(|e| io_error(&audit_path, e))?;
    let mut summary = GovernSummary {
        read: outcomes.len(),
        ..Default::default()
    };
    let mut provider_failures = 0;
    let mut accepted = Vec::new();
    for outcome in outcomes {
        let record = match outcome {
            ItemOutcome::Unreadable(r) | ItemOutcome::Rejected(r) => r,
            ItemOutcome::Malformed(r) => {
                summary.purified += 1;
                r
            }
            ItemOutcome::ProviderFailed(r) => {
                summary.purified += 1;
                provider_failures += 1;
                r
            }
            ItemOutcome::Refined { card, record } => {
                summary.purified += 1;
                summary.distilled += 1;
                if let Some(card) = card {
                    summary.qc_accepted += 1;
                    accepted.push(*card);
                }
                record
            }
        };
        audit.append(&record).map_err(|e| io_error(&audit_path, e))?;
    }
    if provider_failures > 0 && summary.distilled == 0 {
        audit.flush().map_err(|e| io_error(&audit_path, e))?;
        return Err(CommandError::Infra(format!(
            "provider failed for all {provider_failures} purified instances; see {}",
            audit_path.display()
        )));
    }

    let deduped = dedup_detailed(accepted, &embedder, cfg.dedup.threshold)
        .map_err(|e| CommandError::Infra(format!("embedding: {e}")))?;
    summary.deduped = deduped.removed.len();
    for r in &deduped.removed {
        let s = &r.card.source;
        let record = AuditRecord::Dedup {
            repo: s.repo.clone(),
            issue: s.issue,
            pr: s.pr,
            card_id: r.card.card_id.clone(),
            duplicate_of: r.duplicate_of.clone(),
        };
        audit.append(&record).map_err(|e| io_error(&audit_path, e))?;
    }

    let mut store = MemoryStore::for_embedder(&embedder);
    for card in deduped.survivors {
        let (source, card_id) = (card.source.clone(), card.card_id.clone());
        match store.index_card(card, &embedder) {
            Ok(_) => summary.indexed += 1,
            Err(e) => {
                let record = AuditRecord::Index {
                    repo: source.repo,
                    issue: source.issue,
                    pr: source.pr,
                    card_id,
                    reason: e.to_string(),
                };
                audit.append(&record).map_err(|e| io_error(&audit_path, e))?;
            }
        }
    }
    audit.flush().map_err(|e| io_error(&audit_path, e))?;
    save_store(&store, &output_dir).map_err(|e| CommandError::Infra(format!("saving store: {e}")))?;
    tracing::info!(?summary, output = %output_dir.display(), "governance finished");
    Ok(summary)
}

pub(crate) fn ingest_error(path: &Path, e: IngestError) -> CommandError {
    match e {
        IngestError::MissingFile(_) => CommandError::Data(format!("input file not found: {}", path.display())),
        other => CommandError::Infra(format!("{}: {other}", path.display())),
    }
}

pub(crate) fn io_error(path: &Path, e: std::io::Error) -> CommandError {
    CommandError::Infra(format!("{}: {e}", path.display()))
}
