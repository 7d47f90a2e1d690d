//! Indexes cards, searches the index layer, and browses the top hit's resolution layer.
//!
//! `cargo run --example search_and_browse [QUERY]`

use std::path::PathBuf;

use memgov::card::ExperienceCard;
use memgov::index::{HashingEmbedder, MemoryStore, DEFAULT_DIMENSION};

fn main() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/planted_cards.jsonl");
    let embedder = HashingEmbedder::new(DEFAULT_DIMENSION);
    let mut store = MemoryStore::for_embedder(&embedder);
    for line in std::fs::read_to_string(path).expect("planted cards").lines() {
        let card: ExperienceCard = serde_json::from_str(line).expect("card line");
        store.index_card(card, &embedder).expect("card indexes");
    }

    let query = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "TimeoutError: pool checkout timeout under concurrent requests".into());
    println!("query: {query}");
    let hits = store.search(&query, 5, &embedder).expect("query embeds");
    for h in &hits {
        println!("  {:.4}  {}  {}", h.similarity, h.card_id, h.preview.problem_summary);
    }

    let Some(top) = hits.first() else {
        println!("no hits");
        return;
    };
    let card = store.browse(&top.card_id).expect("hit ids resolve");
    println!("\nroot cause:   {}", card.resolution.root_cause);
    println!("fix strategy: {}", card.resolution.fix_strategy);
    println!("patch digest:\n{}", card.resolution.patch_digest);
    println!("verification: {}", card.resolution.verification);
}
