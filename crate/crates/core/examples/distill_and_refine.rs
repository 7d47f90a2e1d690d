//! Distills one purified triplet into an experience card and runs the quality loop.
//!
//! The bundled offline distiller and evaluator stand in for a language model.
//! A wrapper evaluator fails the first draft so the loop has feedback to act on.
//!
//! `cargo run --example distill_and_refine`

use std::path::PathBuf;
use std::sync::atomic::{AtomicU32, Ordering};

use memgov::card::ExperienceCard;
use memgov::distill::{purify_content, StubDistiller};
use memgov::ingest::load_fixture_triplets;
use memgov::purify::{Purification, Purifier, PurifiedInstance};
use memgov::qc::{refine_loop, DimensionScore, Evaluator, QcConfig, QcError, RefineOutcome, StubEvaluator};

/// Scores the first card it sees poorly, then defers to the stub.
struct HarshFirstDraft {
    calls: AtomicU32,
}

impl Evaluator for HarshFirstDraft {
    fn evaluate(
        &self,
        card: &ExperienceCard,
        instance: &PurifiedInstance,
        dimensions: &[String],
    ) -> Result<Vec<DimensionScore>, QcError> {
        let mut scores = StubEvaluator.evaluate(card, instance, dimensions)?;
        if self.calls.fetch_add(1, Ordering::SeqCst) == 0 {
            for s in &mut scores {
                s.score = 0.3;
            }
            scores[0].note = "name the failing function in the root cause".into();
        }
        Ok(scores)
    }
}

fn main() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/govern_triplets.jsonl");
    let purifier = Purifier::default();
    let instance = load_fixture_triplets(&path)
        .expect("fixture opens")
        .filter_map(Result::ok)
        .find_map(|t| match purifier.purify(t) {
            Purification::Accepted(inst) => Some(*inst),
            Purification::Rejected { .. } => None,
        })
        .expect("fixture has an acceptable triplet");
    println!("source: {}", instance.triplet.source());

    let condensed = purify_content(&instance, purifier.classifier());
    println!(
        "condensed thread: kept {} comment(s), dropped {}, {} diff summary line(s)",
        condensed.kept_comments.len(),
        condensed.dropped_count,
        condensed.diff_summary_lines.len()
    );

    let cfg = QcConfig::default();
    let evaluator = HarshFirstDraft { calls: AtomicU32::new(0) };
    let outcome = refine_loop(&instance, &condensed, &StubDistiller, &evaluator, &cfg).expect("offline stages do not fail");
    match outcome {
        RefineOutcome::Accepted { card, report } => {
            println!("accepted at iteration {} with aggregate {:.3}", report.iteration, report.aggregate);
            for (dim, score) in &report.per_dimension {
                println!("  {dim:<16} {score:.2}");
            }
            println!("{}", serde_json::to_string_pretty(&card).unwrap());
        }
        RefineOutcome::Rejected { report, violations, .. } => {
            println!("rejected after {} iteration(s), aggregate {:.3}", report.iteration, report.aggregate);
            for v in violations {
                println!("  schema: {v}");
            }
        }
    }
}
