//! Runs the scripted search policy: query, refine with anchors, browse, and brief.
//!
//! `cargo run --example agentic_search`

use std::path::PathBuf;

use memgov::card::ExperienceCard;
use memgov::commands::{demo_agent, format_trace, DEFAULT_ROUNDS};
use memgov::index::{HashingEmbedder, MemoryStore, DEFAULT_DIMENSION};

const ISSUE: &str = "\
Extracting an archive with a non-ASCII member name crashes

Traceback (most recent call last):
  File \"tools/unpack.py\", line 41, in extract_all
UnicodeDecodeError: 'ascii' codec can't decode byte 0xc3 in position 7
";

fn main() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/planted_cards.jsonl");
    let embedder = HashingEmbedder::new(DEFAULT_DIMENSION);
    let mut store = MemoryStore::for_embedder(&embedder);
    for line in std::fs::read_to_string(path).expect("planted cards").lines() {
        let card: ExperienceCard = serde_json::from_str(line).expect("card line");
        store.index_card(card, &embedder).expect("card indexes");
    }

    let trace = demo_agent(store, embedder, ISSUE, DEFAULT_ROUNDS).expect("issue text has search terms");
    print!("{}", format_trace(&trace));
    if let Some(w) = &trace.warning {
        eprintln!("warning: {w}");
    }
}
