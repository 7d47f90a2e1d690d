use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::Fnv1a64;

pub const DEFAULT_DIMENSION: usize = 256;

/// Tolerance past ±1 that cosine results may show before clamping.
pub const COSINE_EPSILON: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub values: Vec<f32>,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmbedError {
    #[error("embedding contains a non-finite value")]
    NonFinite,
    #[error("embedder returned {got} values, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("embedding provider failure: {0}")]
    Provider(String),
}

impl EmbeddingVector {
    pub fn new(values: Vec<f32>) -> Result<Self, EmbedError> {
        if values.iter().all(|v| v.is_finite()) {
            Ok(Self { values })
        } else {
            Err(EmbedError::NonFinite)
        }
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }
}

/// Maps text to a fixed-length vector. Implementations must be callable from
/// many threads at once.
pub trait Embedder: Send + Sync {
    /// Stable identifier written to store manifests, so that vectors from
    /// different embedders are never mixed.
    fn id(&self) -> String;
    fn dimension(&self) -> usize;
    /// May return the zero vector for text with nothing to embed; callers that
    /// index or search treat that as unembeddable.
    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError>;
}

/// Signed feature hashing: each lowercased alphanumeric token adds ±1 to
/// bucket `fnv1a(token) mod d`, the sign taken from the hash's top bit. The
/// result is L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashingEmbedder {
    dimension: usize,
}

impl HashingEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        Self { dimension }
    }
}

impl Default for HashingEmbedder {
    fn default() -> Self {
        Self::new(DEFAULT_DIMENSION)
    }
}

pub fn tokens(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

impl Embedder for HashingEmbedder {
    fn id(&self) -> String {
        format!("feature-hash-fnv1a-v1-d{}", self.dimension)
    }

    fn dimension(&self) -> usize {
        self.dimension
    }

    fn embed(&self, text: &str) -> Result<EmbeddingVector, EmbedError> {
        let mut acc = vec![0f64; self.dimension];
        for tok in tokens(text) {
            let mut h = Fnv1a64::default();
            h.update(tok.as_bytes());
            let h = h.finish();
            let bucket = (h % self.dimension as u64) as usize;
            acc[bucket] += if h >> 63 == 1 { -1.0 } else { 1.0 };
        }
        let n = acc.iter().map(|x| x * x).sum::<f64>().sqrt();
        let values = if n == 0.0 {
            vec![0f32; self.dimension]
        } else {
            acc.iter().map(|x| (x / n) as f32).collect()
        };
        Ok(EmbeddingVector { values })
    }
}

pub fn embed(text: &str, embedder: &dyn Embedder) -> Result<EmbeddingVector, EmbedError> {
    let v = embedder.embed(text)?;
    if v.dimension() != embedder.dimension() {
        return Err(EmbedError::Dimension {
            expected: embedder.dimension(),
            got: v.dimension(),
        });
    }
    if !v.values.iter().all(|x| x.is_finite()) {
        return Err(EmbedError::NonFinite);
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SimilarityError {
    #[error("cosine similarity of a zero-norm vector")]
    ZeroNorm,
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
}

pub(crate) fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter().zip(b).map(|(x, y)| f64::from(*x) * f64::from(*y)).sum()
}

pub(crate) fn norm(a: &[f32]) -> f64 {
    dot(a, a).sqrt()
}

/// `dot / (na * nb)`, clamped to [-1, 1] and with negative zero folded into zero.
pub(crate) fn cosine_from_parts(dot: f64, na: f64, nb: f64) -> f64 {
    (dot / (na * nb)).clamp(-1.0, 1.0) + 0.0
}

/// Cosine similarity computed in double precision.
pub fn cosine_similarity(a: &EmbeddingVector, b: &EmbeddingVector) -> Result<f64, SimilarityError> {
    if a.dimension() != b.dimension() {
        return Err(SimilarityError::DimensionMismatch(a.dimension(), b.dimension()));
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(SimilarityError::ZeroNorm);
    }
    Ok(cosine_from_parts(dot(&a.values, &b.values), na, nb))
}
