//! Governed experiential memory for coding agents.
//!
//! The pipeline turns raw (issue, pull request, patch) triplets harvested from
//! a forge into validated dual-layer experience cards, indexes them, and
//! serves them to agents through two tools: searching (ranked index-layer
//! previews) and browsing (the full card, resolution layer included).
//!
//! | stage | module |
//! |---|---|
//! | acquisition | [`ingest`] |
//! | repository selection | [`selection`] |
//! | instance purification, diff parsing | [`purify`] |
//! | content purification, card drafting | [`distill`] |
//! | checklist scoring, refine loop | [`qc`] |
//! | embedding, dedup, search, persistence | [`index`] |
//! | agent-facing HTTP tools | [`server`] |
//! | command implementations | [`commands`] |
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod audit;
pub mod card;
pub mod commands;
pub mod distill;
pub mod index;
pub mod ingest;
pub mod provider;
pub mod purify;
pub mod qc;
pub mod retry;
pub mod selection;
pub mod server;

pub use card::{validate_schema, ExperienceCard, IndexLayer, ResolutionLayer, Violation};

/// Incremental 64-bit FNV-1a.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fnv1a64(u64);

impl Default for Fnv1a64 {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv1a64 {
    pub fn update(&mut self, bytes: &[u8]) {
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        self.0 = bytes.iter().fold(self.0, |h, b| (h ^ u64::from(*b)).wrapping_mul(PRIME));
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

/// 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a64::default();
    h.update(bytes);
    h.finish()
}
