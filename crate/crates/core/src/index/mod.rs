//! Embedding, deduplication, ranked search, and persistence of experience cards.
//!
//! Only the index layer is embedded. Search is an exhaustive scan in double
//! precision; results are ordered by descending cosine similarity with ties
//! broken by ascending card id.

mod dedup;
mod embed;
mod persist;
mod store;

pub use dedup::{
    dedup, dedup_detailed, normalized_index_text, DedupOutcome, DuplicateKind, Removed,
    DEFAULT_NEAR_DUPLICATE_THRESHOLD,
};
pub use embed::{
    cosine_similarity, embed, tokens, EmbedError, Embedder, EmbeddingVector, HashingEmbedder,
    SimilarityError, COSINE_EPSILON, DEFAULT_DIMENSION,
};
pub use persist::{
    decode_vectors, load_store, read_manifest, save_store, Manifest, PersistError, CARDS_FILE,
    FORMAT_VERSION, MANIFEST_FILE, VECTORS_FILE, VECTOR_MAGIC,
};
pub use store::{IndexEntry, IndexError, MemoryStore, NotFound, SearchError, SearchHit, DEFAULT_TOP_K};
