//! Removes exact and near-duplicate cards before indexing.
//!
//! `cargo run --example dedup_cards`

use std::path::PathBuf;

use memgov::card::ExperienceCard;
use memgov::index::{dedup_detailed, HashingEmbedder, DEFAULT_DIMENSION, DEFAULT_NEAR_DUPLICATE_THRESHOLD};

fn main() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/planted_cards.jsonl");
    let mut cards: Vec<ExperienceCard> = std::fs::read_to_string(path)
        .expect("planted cards")
        .lines()
        .map(|l| serde_json::from_str(l).expect("card line"))
        .collect();
    let originals = cards.len();

    // Same index text up to case and spacing: an exact duplicate.
    let mut exact = cards[0].clone();
    exact.card_id = "copy-exact".into();
    exact.source.issue += 1;
    exact.index.problem_summary = format!("  {}  ", exact.index.problem_summary.to_uppercase());
    cards.push(exact);

    // One extra word in the summary: a near duplicate.
    let mut near = cards[1].clone();
    near.card_id = "copy-near".into();
    near.source.issue += 1;
    near.index.problem_summary.push_str(" again");
    cards.push(near);

    let embedder = HashingEmbedder::new(DEFAULT_DIMENSION);
    let outcome = dedup_detailed(cards, &embedder, DEFAULT_NEAR_DUPLICATE_THRESHOLD).expect("embedding works");
    println!(
        "{} cards in, {} kept, {} removed (threshold {DEFAULT_NEAR_DUPLICATE_THRESHOLD})",
        originals + 2,
        outcome.survivors.len(),
        outcome.removed.len()
    );
    for r in &outcome.removed {
        println!("  {} is a {:?} duplicate of {}", r.card.card_id, r.kind, r.duplicate_of);
    }
}
