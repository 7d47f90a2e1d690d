//! Invariants checked over generated inputs.

mod common;

use std::fmt::Write as _;

use proptest::prelude::*;
use rand::Rng;

use common::{
    brute_force_top_k, embedding, oracle_card_valid, oracle_cosine, oracle_dedup, random_schema_card,
    random_stats, rng, synthetic_card, vocabulary,
};
use memgov::card::{CardSource, ExperienceCard};
use memgov::index::{cosine_similarity, dedup, embed, HashingEmbedder, MemoryStore};
use memgov::purify::diff::{parse_unified_diff, render_unified_diff};
use memgov::selection::{rank, score_repository, select_top_m, SelectionConfig};
use memgov::validate_schema;

/// A well-formed multi-file unified diff with consistent hunk counts.
fn generated_diff(seed: u64) -> (String, usize, usize) {
    let mut r = rng(seed);
    let vocab = vocabulary(&mut r, 40);
    let mut text = String::new();
    let (mut added, mut removed) = (0, 0);
    for f in 0..r.gen_range(1..4) {
        let path = format!("src/{}_{f}.rs", vocab[r.gen_range(0..vocab.len())]);
        let _ = write!(text, "diff --git a/{path} b/{path}\n--- a/{path}\n+++ b/{path}\n");
        let mut old_start = r.gen_range(1..50u64);
        for _ in 0..r.gen_range(1..4) {
            let mut body = String::new();
            let (mut old_len, mut new_len) = (0u64, 0u64);
            for _ in 0..r.gen_range(1..12) {
                let word = &vocab[r.gen_range(0..vocab.len())];
                match r.gen_range(0..3) {
                    0 => {
                        body.push_str(&format!(" let {word} = {};\n", r.gen_range(0..100)));
                        old_len += 1;
                        new_len += 1;
                    }
                    1 => {
                        body.push_str(&format!("+    {word}();\n"));
                        new_len += 1;
                        added += 1;
                    }
                    _ => {
                        body.push_str(&format!("-    {word}.unwrap();\n"));
                        old_len += 1;
                        removed += 1;
                    }
                }
            }
            let new_start = old_start;
            let _ = writeln!(text, "@@ -{old_start},{old_len} +{new_start},{new_len} @@ fn {}()", vocab[0]);
            text.push_str(&body);
            old_start += old_len + r.gen_range(5..30);
        }
    }
    (text, added, removed)
}

fn card_with_source(repo: &str, issue: u64, pr: u64) -> ExperienceCard {
    let mut r = rng(issue ^ (pr << 20));
    let vocab = vocabulary(&mut r, 50);
    let mut card = synthetic_card(&mut r, &vocab, 0);
    card.source = CardSource { repo: repo.into(), issue, pr };
    card.card_id = ExperienceCard::id_for_source(&card.source);
    card
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn schema_validator_agrees_with_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        for _ in 0..16 {
            let card = random_schema_card(&mut r);
            prop_assert_eq!(validate_schema(&card).is_empty(), oracle_card_valid(&card), "{:#?}", card);
        }
    }

    #[test]
    fn rendered_diff_is_a_parse_fixpoint(seed in any::<u64>()) {
        let (text, added, removed) = generated_diff(seed);
        let parsed = parse_unified_diff(&text).unwrap();
        prop_assert_eq!(parsed.files.iter().map(|f| f.added()).sum::<usize>(), added);
        prop_assert_eq!(parsed.files.iter().map(|f| f.removed()).sum::<usize>(), removed);
        let rendered = render_unified_diff(&parsed);
        let reparsed = parse_unified_diff(&rendered).unwrap();
        prop_assert_eq!(&reparsed, &parsed);
        prop_assert_eq!(render_unified_diff(&reparsed), rendered);
    }

    #[test]
    fn cosine_is_symmetric_and_matches_oracle(seed in any::<u64>()) {
        let mut r = rng(seed);
        let vocab = vocabulary(&mut r, 30);
        let embedder = HashingEmbedder::new(64);
        let a = common::some_words(&mut r, &vocab, 1, 12);
        let b = common::some_words(&mut r, &vocab, 1, 12);
        let (va, vb) = (embed(&a, &embedder).unwrap(), embed(&b, &embedder).unwrap());
        let ab = cosine_similarity(&va, &vb).unwrap();
        let ba = cosine_similarity(&vb, &va).unwrap();
        prop_assert_eq!(ab, ba);
        let expected = oracle_cosine(&embedding(&a, &embedder), &embedding(&b, &embedder)).unwrap();
        prop_assert!((ab - expected).abs() <= 1e-12, "{} vs {}", ab, expected);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&ab));
        prop_assert!((cosine_similarity(&va, &va).unwrap() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn dedup_is_idempotent_and_matches_oracle(seed in any::<u64>(), n in 1usize..40) {
        let mut r = rng(seed);
        let vocab = vocabulary(&mut r, 12);
        let mut cards: Vec<ExperienceCard> = (0..n).map(|i| synthetic_card(&mut r, &vocab, i)).collect();
        for i in 0..n {
            if r.gen_bool(0.2) {
                let j = r.gen_range(0..n);
                cards[i].index = cards[j].index.clone();
            }
        }
        let embedder = HashingEmbedder::new(256);
        let once = dedup(cards.clone(), &embedder, 0.95).unwrap();
        let ids: Vec<String> = once.iter().map(|c| c.card_id.clone()).collect();
        prop_assert_eq!(&ids, &oracle_dedup(&cards, &embedder, 0.95));
        let twice = dedup(once.clone(), &embedder, 0.95).unwrap();
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn smaller_top_k_is_a_prefix(seed in any::<u64>(), k in 1usize..20) {
        let mut r = rng(seed);
        let vocab = vocabulary(&mut r, 25);
        let embedder = HashingEmbedder::new(128);
        let mut store = MemoryStore::for_embedder(&embedder);
        let mut rows = Vec::new();
        for i in 0..30 {
            let card = synthetic_card(&mut r, &vocab, i);
            rows.push((card.card_id.clone(), embedding(&card.index_text(), &embedder)));
            store.index_card(card, &embedder).unwrap();
        }
        let query = common::some_words(&mut r, &vocab, 2, 8);
        let long = store.search(&query, k + 5, &embedder).unwrap();
        let short = store.search(&query, k, &embedder).unwrap();
        prop_assert_eq!(&long[..short.len()], &short[..]);
        let expected = brute_force_top_k(&rows, &embedding(&query, &embedder), k);
        let got: Vec<&str> = short.iter().map(|h| h.card_id.as_str()).collect();
        let want: Vec<&str> = expected.iter().map(|(id, _)| id.as_str()).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn smaller_top_m_is_a_prefix(seed in any::<u64>(), n in 1usize..60, m in 1usize..30) {
        let mut r = rng(seed);
        let stats = random_stats(&mut r, n);
        let cfg = SelectionConfig { top_m: m, ..SelectionConfig::default() };
        let all = rank(stats.iter().map(|s| score_repository(s, &cfg)).collect(), usize::MAX);
        let top = select_top_m(&stats, &cfg);
        prop_assert_eq!(top.len(), m.min(n));
        prop_assert_eq!(&all[..top.len()], &top[..]);
    }

    #[test]
    fn card_id_depends_only_on_source(repo in "[a-z]{1,8}/[a-z]{1,8}", issue in 1u64..100_000, pr in 1u64..100_000) {
        let a = card_with_source(&repo, issue, pr);
        let b = card_with_source(&repo, issue, pr);
        prop_assert_eq!(&a.card_id, &b.card_id);
        let source = CardSource { repo: repo.clone(), issue, pr };
        prop_assert_eq!(ExperienceCard::id_for_source(&source), a.card_id.clone());
        prop_assert!(a.card_id.starts_with("mg-") && a.card_id.len() == 19);
        let other = CardSource { repo, issue, pr: pr + 1 };
        prop_assert_ne!(ExperienceCard::id_for_source(&other), a.card_id);
    }
}
