use std::sync::OnceLock;

use regex::Regex;

fn closing_keyword() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?i)\b(?:fix(?:e[sd])?|close[sd]?|resolve[sd]?)\s*:?\s+#(\d+)\b").unwrap()
    })
}

/// Issue numbers referenced with a closing keyword (`fixes #N`, `closes #N`,
/// `resolves #N` and their tense variants), in first-seen order.
pub fn detect_linked_issues<'a>(texts: impl IntoIterator<Item = &'a str>) -> Vec<u64> {
    let mut out = Vec::new();
    for text in texts {
        for cap in closing_keyword().captures_iter(text) {
            if let Ok(n) = cap[1].parse::<u64>() {
                if n > 0 && !out.contains(&n) {
                    out.push(n);
                }
            }
        }
    }
    out
}
