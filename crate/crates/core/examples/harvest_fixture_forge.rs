//! Lists repositories and harvests linked (issue, PR, patch) triplets from an offline forge.
//!
//! `cargo run --example harvest_fixture_forge`

use memgov::ingest::{fetch_repo_stats, harvest_triplets, FixtureForge, FixtureRepo, RepoStats};
use serde_json::json;

const PATCH: &str = "diff --git a/lib/cache.js b/lib/cache.js\n--- a/lib/cache.js\n+++ b/lib/cache.js\n@@ -12,3 +12,5 @@\n function lookup(key) {\n+  if (!store.has(key)) {\n+    return undefined;\n+  }\n   return store.get(key).value;\n";

fn main() {
    let issue = json!({
        "number": 7,
        "title": "lookup() throws TypeError for missing keys",
        "body": "TypeError: Cannot read properties of undefined (reading 'value')\n    at lookup (lib/cache.js:14:27)",
        "comments": [
            { "author_role": "maintainer", "body": "Confirmed, lib/cache.js assumes the key exists.", "timestamp": "2024-03-01T10:00:00Z" }
        ]
    });
    let forge = FixtureForge::new(vec![
        FixtureRepo {
            stats: RepoStats { repo: "acme/cache".into(), stars: 2_400, issues: 310, pulls: 150 },
            issues: vec![issue, json!({ "number": "eight" })],
            pulls: vec![
                json!({ "number": 9, "title": "Guard missing keys", "body": "Fixes #7", "merged": true, "diff": PATCH }),
                json!({ "number": 10, "title": "Unrelated cleanup", "body": "", "merged": true, "diff": PATCH }),
            ],
        },
        FixtureRepo {
            stats: RepoStats { repo: "acme/toy".into(), stars: 4, issues: 1, pulls: 0 },
            issues: vec![],
            pulls: vec![],
        },
    ]);

    for s in fetch_repo_stats(&forge, 100).expect("fixture forge lists") {
        println!("{}: {} stars, {} issues, {} pulls", s.repo, s.stars, s.issues, s.pulls);
        for item in harvest_triplets(&forge, &s.repo).expect("repository exists") {
            match item {
                Ok(t) => println!(
                    "  triplet {} (merged: {}, {} patch bytes)",
                    t.source(),
                    t.pr.merged,
                    t.patch_text.len()
                ),
                Err(e) => println!("  skipped {e}"),
            }
        }
    }
}
