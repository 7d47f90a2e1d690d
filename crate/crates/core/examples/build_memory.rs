//! Runs the whole governance pipeline offline and persists the memory store.
//!
//! `cargo run --example build_memory [OUT_DIR]`

use std::path::PathBuf;

use memgov::commands::{govern, stats, GovernOptions, PipelineConfig, AUDIT_FILE};
use memgov::index::load_store;

fn main() {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("memgov-example-store"));
    let opts = GovernOptions {
        input: Some(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/govern_triplets.jsonl")),
        output_dir: Some(out.clone()),
        fixture_mode: true,
        ..GovernOptions::default()
    };
    let summary = govern(&PipelineConfig::default(), &opts).unwrap_or_else(|e| {
        eprintln!("governance failed: {e}");
        std::process::exit(e.exit_code().into());
    });
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());

    let store = load_store(&out).expect("store was just written");
    println!("reloaded {} cards of dimension {} from {}", store.len(), store.dimension(), out.display());

    let audit = out.join(AUDIT_FILE);
    let st = stats(&out, Some(&audit)).expect("stats over a fresh store");
    println!("{} repositories, {:.1} signals per card", st.repositories, st.mean_signals);
    for (stage, n) in st.audit.unwrap_or_default() {
        println!("  audit {stage:<13} {n}");
    }
}
