//! Parses a unified diff, reports per-file line counts, and renders it back.
//!
//! `cargo run --example parse_diff [FILE]` (reads a built-in patch without FILE)

use memgov::purify::{parse_unified_diff, render_unified_diff};

const PATCH: &str = "\
diff --git a/src/config.rs b/src/config.rs
index 1a2b3c4..5d6e7f8 100644
--- a/src/config.rs
+++ b/src/config.rs
@@ -40,5 +40,6 @@ impl Config {
     pub fn timeout(&self) -> Duration {
-        Duration::from_secs(self.timeout.unwrap())
+        let secs = self.timeout.unwrap_or(DEFAULT_TIMEOUT_SECS);
+        Duration::from_secs(secs)
     }
 
     pub fn retries(&self) -> u32 {
@@ -90,1 +91,3 @@ impl Config {
 }
+
+const DEFAULT_TIMEOUT_SECS: u64 = 30;
diff --git a/tests/config.rs b/tests/config.rs
new file mode 100644
--- /dev/null
+++ b/tests/config.rs
@@ -0,0 +1,3 @@
+#[test]
+fn missing_timeout_uses_default() {
+}
";

fn main() {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}")),
        None => PATCH.to_string(),
    };
    let diff = match parse_unified_diff(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("unparsable diff: {e}");
            std::process::exit(2);
        }
    };
    for file in &diff.files {
        println!("{}: +{} -{} in {} hunk(s)", file.path(), file.added(), file.removed(), file.hunks.len());
        for h in &file.hunks {
            println!("  @@ -{},{} +{},{} @@ {}", h.old_start, h.old_len, h.new_start, h.new_len, h.section);
        }
    }
    let rendered = render_unified_diff(&diff);
    let again = parse_unified_diff(&rendered).expect("rendered diff parses");
    assert_eq!(again, diff);
    println!("round trip: {} bytes rendered, structure preserved", rendered.len());
}
