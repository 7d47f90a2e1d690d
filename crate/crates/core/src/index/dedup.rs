use std::collections::HashMap;

use super::embed::{cosine_from_parts, dot, embed, EmbedError, Embedder};
use crate::card::ExperienceCard;

pub const DEFAULT_NEAR_DUPLICATE_THRESHOLD: f64 = 0.95;

/// Lowercased index text with whitespace runs collapsed to single spaces.
pub fn normalized_index_text(card: &ExperienceCard) -> String {
    card.index_text()
        .split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DuplicateKind {
    Exact,
    Near,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Removed {
    pub card: ExperienceCard,
    pub duplicate_of: String,
    pub kind: DuplicateKind,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DedupOutcome {
    /// Kept cards, in input order.
    pub survivors: Vec<ExperienceCard>,
    /// Dropped cards, in input order.
    pub removed: Vec<Removed>,
}

/// Two-stage deduplication.
///
/// Exact stage: cards whose normalized index text coincides collapse to the
/// one with the smallest source. Near stage: visiting the rest in ascending
/// source order, a card is dropped when its similarity to an already kept card
/// reaches `threshold`. Cards that embed to the zero vector skip the near
/// stage. Survivors keep their input order, which makes the operation
/// idempotent.
pub fn dedup_detailed(
    cards: Vec<ExperienceCard>,
    embedder: &dyn Embedder,
    threshold: f64,
) -> Result<DedupOutcome, EmbedError> {
    let n = cards.len();
    let mut duplicate_of: Vec<Option<(usize, DuplicateKind)>> = vec![None; n];

    let mut by_text: HashMap<String, usize> = HashMap::new();
    for (i, card) in cards.iter().enumerate() {
        let slot = by_text.entry(normalized_index_text(card)).or_insert(i);
        if cards[i].source < cards[*slot].source {
            *slot = i;
        }
    }
    for (i, card) in cards.iter().enumerate() {
        let keep = by_text[&normalized_index_text(card)];
        if keep != i {
            duplicate_of[i] = Some((keep, DuplicateKind::Exact));
        }
    }

    let mut order: Vec<usize> = (0..n).filter(|&i| duplicate_of[i].is_none()).collect();
    order.sort_by(|&a, &b| cards[a].source.cmp(&cards[b].source).then(a.cmp(&b)));
    let mut kept: Vec<(usize, Vec<f32>, f64)> = Vec::new();
    for i in order {
        let v = embed(&cards[i].index_text(), embedder)?;
        let n = v.norm();
        if n == 0.0 {
            continue;
        }
        let hit = kept
            .iter()
            .find(|(_, kv, kn)| cosine_from_parts(dot(&v.values, kv), n, *kn) >= threshold);
        match hit {
            Some((j, _, _)) => duplicate_of[i] = Some((*j, DuplicateKind::Near)),
            None => kept.push((i, v.values, n)),
        }
    }

    let ids: Vec<String> = cards.iter().map(|c| c.card_id.clone()).collect();
    let mut outcome = DedupOutcome::default();
    for (card, dup) in cards.into_iter().zip(duplicate_of) {
        match dup {
            None => outcome.survivors.push(card),
            Some((j, kind)) => outcome.removed.push(Removed {
                card,
                duplicate_of: ids[j].clone(),
                kind,
            }),
        }
    }
    Ok(outcome)
}

/// Surviving cards of [`dedup_detailed`].
pub fn dedup(
    cards: Vec<ExperienceCard>,
    embedder: &dyn Embedder,
    threshold: f64,
) -> Result<Vec<ExperienceCard>, EmbedError> {
    dedup_detailed(cards, embedder, threshold).map(|o| o.survivors)
}
