//! Repository scoring and top-M selection.
//!
//! `score = λs·ln(1+stars) + λi·ln(1+issues) + λp·ln(1+pulls)`

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::RepoStats;

#[derive(Debug, Error, PartialEq)]
pub enum SelectionError {
    #[error("selection weights must be finite and non-negative")]
    NegativeWeight,
    #[error("at least one selection weight must be positive")]
    AllWeightsZero,
    #[error("top_m must be at least 1")]
    ZeroTopM,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelectionConfig {
    pub lambda_s: f64,
    pub lambda_i: f64,
    pub lambda_p: f64,
    pub top_m: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            lambda_s: 1.0,
            lambda_i: 1.0,
            lambda_p: 1.0,
            top_m: 50,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<(), SelectionError> {
        let weights = [self.lambda_s, self.lambda_i, self.lambda_p];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(SelectionError::NegativeWeight);
        }
        if weights.iter().all(|w| *w == 0.0) {
            return Err(SelectionError::AllWeightsZero);
        }
        if self.top_m == 0 {
            return Err(SelectionError::ZeroTopM);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepoScore {
    pub repo: String,
    pub score: f64,
}

pub fn score_repository(stats: &RepoStats, cfg: &SelectionConfig) -> RepoScore {
    let score = cfg.lambda_s * (stats.stars as f64).ln_1p()
        + cfg.lambda_i * (stats.issues as f64).ln_1p()
        + cfg.lambda_p * (stats.pulls as f64).ln_1p();
    RepoScore {
        repo: stats.repo.clone(),
        score,
    }
}

/// Same formula with logarithms taken in `base`. Only useful for checking
/// that the base does not affect which repositories are selected.
pub fn score_repository_in_base(stats: &RepoStats, cfg: &SelectionConfig, base: f64) -> RepoScore {
    let log = |x: u64| (x as f64).ln_1p() / base.ln();
    RepoScore {
        repo: stats.repo.clone(),
        score: cfg.lambda_s * log(stats.stars)
            + cfg.lambda_i * log(stats.issues)
            + cfg.lambda_p * log(stats.pulls),
    }
}

/// Descending score, ties by slug ascending.
fn rank_order(a: &RepoScore, b: &RepoScore) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.repo.cmp(&b.repo))
}

pub fn rank(mut scores: Vec<RepoScore>, top_m: usize) -> Vec<RepoScore> {
    scores.sort_by(rank_order);
    scores.truncate(top_m);
    scores
}

pub fn select_top_m(all: &[RepoStats], cfg: &SelectionConfig) -> Vec<RepoScore> {
    rank(all.iter().map(|s| score_repository(s, cfg)).collect(), cfg.top_m)
}
