//! Scores candidate repositories by log-scaled activity and keeps the top M.
//!
//! `cargo run --example select_repositories`

use memgov::ingest::RepoStats;
use memgov::selection::{score_repository, select_top_m, SelectionConfig};

fn main() {
    let candidates = [
        ("tokio-rs/tokio", 27_000, 2_300, 4_100),
        ("psf/requests", 52_000, 6_200, 2_900),
        ("acme/tiny", 120, 14, 9),
        ("acme/popular-but-quiet", 40_000, 40, 12),
        ("acme/busy", 3_000, 9_000, 7_500),
    ];
    let stats: Vec<RepoStats> = candidates
        .iter()
        .map(|&(repo, stars, issues, pulls)| RepoStats { repo: repo.into(), stars, issues, pulls })
        .collect();

    let cfg = SelectionConfig { top_m: 3, ..SelectionConfig::default() };
    cfg.validate().expect("default weights are valid");

    println!("all candidates:");
    for s in &stats {
        let scored = score_repository(s, &cfg);
        println!("  {:8.4}  {}", scored.score, scored.repo);
    }
    println!("top {}:", cfg.top_m);
    for (rank, s) in select_top_m(&stats, &cfg).iter().enumerate() {
        println!("  {}. {} ({:.4})", rank + 1, s.repo, s.score);
    }

    let issue_heavy = SelectionConfig { lambda_s: 0.2, lambda_i: 1.0, lambda_p: 1.0, top_m: 3 };
    let top: Vec<_> = select_top_m(&stats, &issue_heavy).into_iter().map(|s| s.repo).collect();
    println!("top 3 with stars down-weighted: {}", top.join(", "));
}
