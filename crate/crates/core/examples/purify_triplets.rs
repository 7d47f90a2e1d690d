//! Purifies the bundled triplet fixture and tallies acceptances and rejection reasons.
//!
//! `cargo run --example purify_triplets [TRIPLETS.jsonl]`

use std::collections::BTreeMap;
use std::path::PathBuf;

use memgov::ingest::load_fixture_triplets;
use memgov::purify::{Purification, PurificationConfig, Purifier};

fn main() {
    let path = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| {
        PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/govern_triplets.jsonl")
    });
    let purifier = Purifier::new(PurificationConfig::default()).expect("default config is valid");

    let mut accepted = 0;
    let mut reasons: BTreeMap<&'static str, Vec<String>> = BTreeMap::new();
    for record in load_fixture_triplets(&path).expect("triplet file opens") {
        let triplet = match record {
            Ok(t) => t,
            Err(e) => {
                reasons.entry("unreadable").or_default().push(e.to_string());
                continue;
            }
        };
        let ratio = purifier.ratio(&triplet);
        let source = triplet.source();
        match purifier.purify(triplet) {
            Purification::Accepted(inst) => {
                accepted += 1;
                if accepted <= 3 {
                    println!("accepted {source}: ratio {ratio:.3}, {} anchor(s)", inst.anchors.len());
                }
            }
            Purification::Rejected { reason, .. } => {
                reasons.entry(reason.code()).or_default().push(format!("{source}: {reason}"));
            }
        }
    }

    println!("accepted: {accepted}");
    for (code, items) in &reasons {
        println!("rejected {code}: {}", items.len());
        println!("  e.g. {}", items[0]);
    }
}
