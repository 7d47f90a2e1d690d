use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::embed::{cosine_from_parts, dot, embed, norm, EmbedError, Embedder, EmbeddingVector};
use crate::card::{ExperienceCard, IndexLayer};

pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub card_id: String,
    pub vector: EmbeddingVector,
    pub index_text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub card_id: String,
    pub similarity: f64,
    pub preview: IndexLayer,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IndexError {
    #[error("card {0} has no embeddable index text")]
    Unembeddable(String),
    #[error("card {0} is already indexed")]
    Duplicate(String),
    #[error("store uses embedder `{store}`, got `{given}`")]
    EmbedderMismatch { store: String, given: String },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("top_k must be at least 1")]
    ZeroK,
    #[error("query has no embeddable text")]
    Unembeddable,
    #[error("store uses embedder `{store}`, got `{given}`")]
    EmbedderMismatch { store: String, given: String },
    #[error("query vector has dimension {got}, store has {expected}")]
    Dimension { expected: usize, got: usize },
    #[error(transparent)]
    Embed(#[from] EmbedError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("no card with id `{0}`")]
pub struct NotFound(pub String);

/// Cards with their index-layer embeddings, searched by exhaustive scan.
///
/// Mutation needs `&mut`; a loaded store is shared read-only (e.g. behind an
/// `Arc`) for concurrent searches.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryStore {
    embedder_id: String,
    dimension: usize,
    cards: Vec<ExperienceCard>,
    /// Row-major, `dimension` floats per card.
    vectors: Vec<f32>,
    norms: Vec<f64>,
    by_id: HashMap<String, usize>,
}

impl MemoryStore {
    pub fn new(embedder_id: impl Into<String>, dimension: usize) -> Self {
        Self {
            embedder_id: embedder_id.into(),
            dimension,
            cards: Vec::new(),
            vectors: Vec::new(),
            norms: Vec::new(),
            by_id: HashMap::new(),
        }
    }

    pub fn for_embedder(embedder: &dyn Embedder) -> Self {
        Self::new(embedder.id(), embedder.dimension())
    }

    /// Assembles a store from persisted parts. Rows must be nonzero and align
    /// with `cards`; ids must be unique.
    pub(crate) fn from_parts(
        embedder_id: String,
        dimension: usize,
        cards: Vec<ExperienceCard>,
        vectors: Vec<f32>,
    ) -> Result<Self, String> {
        if vectors.len() != cards.len() * dimension {
            return Err(format!(
                "{} floats for {} cards of dimension {dimension}",
                vectors.len(),
                cards.len()
            ));
        }
        let mut store = Self::new(embedder_id, dimension);
        store.vectors = vectors;
        for (i, card) in cards.iter().enumerate() {
            let n = norm(store.row(i));
            if n == 0.0 || !n.is_finite() {
                return Err(format!("vector {i} ({}) is zero or non-finite", card.card_id));
            }
            store.norms.push(n);
            if store.by_id.insert(card.card_id.clone(), i).is_some() {
                return Err(format!("duplicate card id {}", card.card_id));
            }
        }
        store.cards = cards;
        Ok(store)
    }

    pub fn embedder_id(&self) -> &str {
        &self.embedder_id
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn cards(&self) -> &[ExperienceCard] {
        &self.cards
    }

    pub(crate) fn raw_vectors(&self) -> &[f32] {
        &self.vectors
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.vectors[i * self.dimension..(i + 1) * self.dimension]
    }

    pub fn entry(&self, i: usize) -> Option<IndexEntry> {
        let card = self.cards.get(i)?;
        Some(IndexEntry {
            card_id: card.card_id.clone(),
            vector: EmbeddingVector {
                values: self.row(i).to_vec(),
            },
            index_text: card.index_text(),
        })
    }

    pub fn contains(&self, card_id: &str) -> bool {
        self.by_id.contains_key(card_id)
    }

    fn check_embedder(&self, embedder: &dyn Embedder) -> Result<(), (String, String)> {
        if embedder.id() == self.embedder_id && embedder.dimension() == self.dimension {
            Ok(())
        } else {
            Err((self.embedder_id.clone(), embedder.id()))
        }
    }

    /// Embeds the card's index text and appends it.
    pub fn index_card(&mut self, card: ExperienceCard, embedder: &dyn Embedder) -> Result<String, IndexError> {
        self.check_embedder(embedder)
            .map_err(|(store, given)| IndexError::EmbedderMismatch { store, given })?;
        if self.by_id.contains_key(&card.card_id) {
            return Err(IndexError::Duplicate(card.card_id));
        }
        let vector = embed(&card.index_text(), embedder)?;
        let n = vector.norm();
        if n == 0.0 {
            return Err(IndexError::Unembeddable(card.card_id));
        }
        let id = card.card_id.clone();
        self.vectors.extend_from_slice(&vector.values);
        self.norms.push(n);
        self.by_id.insert(id.clone(), self.cards.len());
        self.cards.push(card);
        Ok(id)
    }

    pub fn browse(&self, card_id: &str) -> Result<&ExperienceCard, NotFound> {
        self.by_id
            .get(card_id)
            .map(|&i| &self.cards[i])
            .ok_or_else(|| NotFound(card_id.to_string()))
    }

    pub fn search(&self, query: &str, k: usize, embedder: &dyn Embedder) -> Result<Vec<SearchHit>, SearchError> {
        if k == 0 {
            return Err(SearchError::ZeroK);
        }
        self.check_embedder(embedder)
            .map_err(|(store, given)| SearchError::EmbedderMismatch { store, given })?;
        let q = embed(query, embedder)?;
        self.search_vector(&q, k)
    }

    /// Top `k` by descending cosine similarity, ties by card id ascending.
    pub fn search_vector(&self, query: &EmbeddingVector, k: usize) -> Result<Vec<SearchHit>, SearchError> {
        if k == 0 {
            return Err(SearchError::ZeroK);
        }
        if query.dimension() != self.dimension {
            return Err(SearchError::Dimension {
                expected: self.dimension,
                got: query.dimension(),
            });
        }
        let qn = query.norm();
        if qn == 0.0 {
            return Err(SearchError::Unembeddable);
        }
        let mut scored: Vec<(f64, usize)> = (0..self.cards.len())
            .map(|i| (cosine_from_parts(dot(&query.values, self.row(i)), qn, self.norms[i]), i))
            .collect();
        let order = |a: &(f64, usize), b: &(f64, usize)| -> Ordering {
            b.0.total_cmp(&a.0)
                .then_with(|| self.cards[a.1].card_id.cmp(&self.cards[b.1].card_id))
        };
        if k < scored.len() {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_unstable_by(order);
        Ok(scored
            .into_iter()
            .map(|(similarity, i)| SearchHit {
                card_id: self.cards[i].card_id.clone(),
                similarity,
                preview: self.cards[i].index.clone(),
            })
            .collect())
    }
}
