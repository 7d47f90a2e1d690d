//! Independent oracles and generators shared by the integration tests.
//!
//! Nothing here calls the library code it is checking: the logarithm, the
//! schema rules, cosine ranking and duplicate removal are re-derived from
//! their definitions.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashSet};
use std::path::PathBuf;

use memgov::card::{CardSource, ExperienceCard, IndexLayer, ResolutionLayer};
use memgov::index::{embed, Embedder, HashingEmbedder};
use memgov::ingest::RepoStats;
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

// ---------------------------------------------------------------------------
// Arbitrary-precision repository score
// ---------------------------------------------------------------------------

/// Fractional bits of the fixed-point representation.
const FRAC_BITS: u32 = 256;

fn atanh_fixed(z: &BigInt) -> BigInt {
    let z_sq = (z * z) >> FRAC_BITS;
    let mut term = z.clone();
    let mut sum = BigInt::zero();
    let mut k = 1u32;
    while !term.is_zero() {
        sum += &term / BigInt::from(k);
        term = (&term * &z_sq) >> FRAC_BITS;
        k += 2;
    }
    sum
}

/// `ln(n)` scaled by `2^FRAC_BITS`, via `ln(n) = k·ln 2 + 2·atanh((m-1)/(m+1))`
/// with `n = m·2^k`, `m ∈ [1, 2)`.
pub fn ln_fixed(n: &BigInt) -> BigInt {
    assert!(*n >= BigInt::one());
    let one = BigInt::one() << FRAC_BITS;
    let ln2 = atanh_fixed(&(&one / BigInt::from(3))) * 2;
    let k = n.bits() - 1;
    let m = (n << FRAC_BITS) >> k;
    let z = ((&m - &one) << FRAC_BITS) / (&m + &one);
    ln2 * BigInt::from(k) + atanh_fixed(&z) * 2
}

/// Exact value of a finite non-negative `f64` times a fixed-point number.
fn scale_by_f64(x: f64, fixed: &BigInt) -> BigInt {
    assert!(x.is_finite() && x >= 0.0);
    if x == 0.0 {
        return BigInt::zero();
    }
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exp) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    let product = fixed * BigInt::from(mantissa);
    if exp >= 0 {
        product << exp as u32
    } else {
        product >> (-exp) as u32
    }
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    v.to_f64().expect("finite") * 2f64.powi(-(FRAC_BITS as i32))
}

/// `λs·ln(1+S) + λi·ln(1+I) + λp·ln(1+P)` evaluated with 256 fractional bits.
pub fn oracle_score(stats: &RepoStats, weights: (f64, f64, f64)) -> f64 {
    let ln1p = |x: u64| ln_fixed(&(BigInt::from(x) + 1));
    let total = scale_by_f64(weights.0, &ln1p(stats.stars))
        + scale_by_f64(weights.1, &ln1p(stats.issues))
        + scale_by_f64(weights.2, &ln1p(stats.pulls));
    fixed_to_f64(&total)
}

/// Log-uniform counts with zeros and a few duplicated rows.
pub fn random_stats(rng: &mut ChaCha8Rng, n: usize) -> Vec<RepoStats> {
    let count = |rng: &mut ChaCha8Rng| -> u64 {
        if rng.gen_bool(0.05) {
            0
        } else {
            10f64.powf(rng.gen_range(0.0..7.0)) as u64
        }
    };
    let mut out: Vec<RepoStats> = Vec::with_capacity(n);
    for i in 0..n {
        let (stars, issues, pulls) = if i > 0 && rng.gen_bool(0.03) {
            let twin = &out[rng.gen_range(0..i)];
            (twin.stars, twin.issues, twin.pulls)
        } else {
            (count(rng), count(rng), count(rng))
        };
        out.push(RepoStats {
            repo: format!("org{}/repo{i:05}", rng.gen_range(0..40)),
            stars,
            issues,
            pulls,
        });
    }
    out
}

// ---------------------------------------------------------------------------
// Card schema
// ---------------------------------------------------------------------------

pub fn collapse_lower(s: &str) -> String {
    let mut out = String::new();
    let mut pending_space = false;
    for ch in s.chars() {
        if ch.is_whitespace() {
            pending_space = !out.is_empty();
        } else {
            if pending_space {
                out.push(' ');
                pending_space = false;
            }
            out.extend(ch.to_lowercase());
        }
    }
    out
}

fn has_long_hex_run(s: &str) -> bool {
    let mut run = 0;
    for ch in s.chars() {
        if ch.is_ascii_hexdigit() {
            run += 1;
            if run >= 12 {
                return true;
            }
        } else {
            run = 0;
        }
    }
    false
}

fn names_repo(text: &str, repo: &str) -> bool {
    let repo = repo.trim().to_lowercase();
    has_long_hex_run(text) || (!repo.is_empty() && text.to_lowercase().contains(&repo))
}

fn prefixed_lines(digest: &str, prefix: &str) -> usize {
    digest
        .lines()
        .filter_map(|l| l.trim_start().strip_prefix(prefix))
        .filter(|rest| !rest.trim().is_empty())
        .count()
}

/// Every card invariant, checked from scratch.
pub fn oracle_card_valid(card: &ExperienceCard) -> bool {
    let repo = &card.source.repo;
    let blank = |s: &str| s.trim().is_empty();
    if blank(&card.card_id) || blank(repo) || card.source.issue == 0 || card.source.pr == 0 {
        return false;
    }
    let summary = &card.index.problem_summary;
    if blank(summary) || names_repo(summary, repo) {
        return false;
    }
    let signals = &card.index.signals;
    if signals.len() < 10 || signals.len() > 18 {
        return false;
    }
    let mut seen = HashSet::new();
    for s in signals {
        let n = collapse_lower(s);
        if n.is_empty() || n.split(' ').count() > 6 || names_repo(s, repo) || !seen.insert(n) {
            return false;
        }
    }
    let r = &card.resolution;
    if [&r.root_cause, &r.fix_strategy, &r.patch_digest, &r.verification]
        .iter()
        .any(|f| blank(f))
    {
        return false;
    }
    let chunks = prefixed_lines(&r.patch_digest, "CHUNK:");
    prefixed_lines(&r.patch_digest, "AREA:") >= 1 && (3..=8).contains(&chunks)
}

const WORDS: &[&str] = &[
    "socket", "timeout", "parser", "null", "index", "overflow", "cache", "lock", "thread", "panic",
    "decode", "utf8", "config", "retry", "stream", "buffer", "token", "schema", "offset", "merge",
    "handler", "render", "session", "pool", "queue", "path", "encoding", "signal", "header", "frame",
];

fn phrase(rng: &mut ChaCha8Rng, words: usize) -> String {
    (0..words).map(|_| *WORDS.choose(rng).unwrap()).collect::<Vec<_>>().join(" ")
}

fn hex(rng: &mut ChaCha8Rng, len: usize) -> String {
    (0..len).map(|_| std::char::from_digit(rng.gen_range(0..16), 16).unwrap()).collect()
}

/// Random cards that sit near every schema boundary, roughly half valid.
pub fn random_schema_card(rng: &mut ChaCha8Rng) -> ExperienceCard {
    let p = 0.04;
    let repo = if rng.gen_bool(p) { " ".to_string() } else { format!("acme/{}", phrase(rng, 1)) };
    let n = rng.gen_range(3..9);
    let mut summary = phrase(rng, n);
    match rng.gen_range(0..40) {
        0 => summary = "  ".into(),
        1 => summary.push_str(&format!(" in {repo}")),
        2 => summary.push_str(&format!(" at {}", hex(rng, 12))),
        3 => summary.push_str(&format!(" at {}", hex(rng, 11))),
        4 => summary.push_str(&format!(" in {}", repo.to_uppercase())),
        _ => {}
    }

    let count = match rng.gen_range(0..10) {
        0 => rng.gen_range(7..10),
        1 => rng.gen_range(19..22),
        2 => *[10, 18].choose(rng).unwrap(),
        _ => rng.gen_range(10..19),
    };
    let mut signals: Vec<String> = Vec::with_capacity(count);
    let mut distinct = HashSet::new();
    while signals.len() < count {
        let words = if rng.gen_bool(0.03) { 7 } else { rng.gen_range(1..7) };
        let s = format!("{} {}", phrase(rng, words - 1), signals.len()).trim().to_string();
        if distinct.insert(s.clone()) {
            signals.push(s);
        }
    }
    for s in signals.iter_mut() {
        match rng.gen_range(0..200) {
            0 => *s = " \t ".into(),
            1 => *s = format!("commit {}", hex(rng, 12)),
            2 => *s = format!("commit {}", hex(rng, 11)),
            3 => *s = format!("see {repo}"),
            4 => *s = format!("  {}\t  {}  ", phrase(rng, 2), phrase(rng, 2)),
            _ => {}
        }
    }
    if rng.gen_bool(0.06) && signals.len() > 1 {
        let i = rng.gen_range(1..signals.len());
        let j = rng.gen_range(0..i);
        signals[i] = format!("  {}  ", signals[j].to_uppercase().replace(' ', "   "));
    }

    let areas = if rng.gen_bool(0.05) { 0 } else { rng.gen_range(1..3) };
    let chunks = match rng.gen_range(0..10) {
        0 => rng.gen_range(0..3),
        1 => rng.gen_range(9..11),
        2 => *[3, 8].choose(rng).unwrap(),
        _ => rng.gen_range(3..9),
    };
    let mut digest: Vec<String> = (0..areas).map(|i| format!("AREA: src/{}.rs", WORDS[i])).collect();
    digest.extend((0..chunks).map(|i| format!("  CHUNK: {} {i}", phrase(rng, 3))));
    if rng.gen_bool(0.1) {
        digest.push("CHUNK:   ".into());
        digest.push("AREA:".into());
    }
    let mut fields: Vec<String> = vec![
        phrase(rng, 6),
        phrase(rng, 6),
        digest.join("\n"),
        phrase(rng, 5),
    ];
    if rng.gen_bool(0.08) {
        let i = rng.gen_range(0..4);
        fields[i] = "\n ".into();
    }
    let [root_cause, fix_strategy, patch_digest, verification]: [String; 4] = fields.try_into().unwrap();
    ExperienceCard {
        card_id: if rng.gen_bool(p) { String::new() } else { format!("c{}", rng.gen::<u32>()) },
        source: CardSource {
            repo,
            issue: if rng.gen_bool(p) { 0 } else { rng.gen_range(1..5000) },
            pr: if rng.gen_bool(p) { 0 } else { rng.gen_range(1..5000) },
        },
        index: IndexLayer { problem_summary: summary, signals },
        resolution: ResolutionLayer { root_cause, fix_strategy, patch_digest, verification },
    }
}

// ---------------------------------------------------------------------------
// Synthetic stores
// ---------------------------------------------------------------------------

/// Pronounceable pseudo-words, so random texts share few tokens.
pub fn vocabulary(rng: &mut ChaCha8Rng, n: usize) -> Vec<String> {
    const ONSETS: &[&str] = &["b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z", "br", "st", "tr", "kl"];
    const VOWELS: &[&str] = &["a", "e", "i", "o", "u", "ai", "ou"];
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let syllables = rng.gen_range(2..4);
        let w: String = (0..syllables)
            .map(|_| format!("{}{}", ONSETS.choose(rng).unwrap(), VOWELS.choose(rng).unwrap()))
            .collect();
        if seen.insert(w.clone()) {
            out.push(w);
        }
    }
    out
}

/// Between `lo` and `hi - 1` random words.
pub fn some_words(rng: &mut ChaCha8Rng, vocab: &[String], lo: usize, hi: usize) -> String {
    let n = rng.gen_range(lo..hi);
    words(rng, vocab, n)
}

pub fn words(rng: &mut ChaCha8Rng, vocab: &[String], n: usize) -> String {
    (0..n).map(|_| vocab.choose(rng).unwrap().as_str()).collect::<Vec<_>>().join(" ")
}

/// A schema-valid card with random vocabulary. `i` fixes the id and source.
pub fn synthetic_card(rng: &mut ChaCha8Rng, vocab: &[String], i: usize) -> ExperienceCard {
    let n_signals = rng.gen_range(10..15);
    let mut signals: Vec<String> = Vec::with_capacity(n_signals);
    while signals.len() < n_signals {
        let n = rng.gen_range(1..4);
        let s = words(rng, vocab, n);
        if !signals.contains(&s) {
            signals.push(s);
        }
    }
    let n = rng.gen_range(5..11);
    let problem_summary = words(rng, vocab, n);
    ExperienceCard {
        card_id: format!("syn-{i:06}"),
        source: CardSource { repo: format!("synth/r{:02}", i % 50), issue: i as u64 + 1, pr: i as u64 + 1 },
        index: IndexLayer { problem_summary, signals },
        resolution: ResolutionLayer {
            root_cause: format!("cause {i}: {}", words(rng, vocab, 8)),
            fix_strategy: format!("fix {i}: {}", words(rng, vocab, 8)),
            patch_digest: format!(
                "AREA: src/m{i}.rs\nCHUNK: {}\nCHUNK: {}\nCHUNK: {}",
                words(rng, vocab, 3),
                words(rng, vocab, 3),
                words(rng, vocab, 3)
            ),
            verification: format!("verify {i}: {}", words(rng, vocab, 6)),
        },
    }
}

// ---------------------------------------------------------------------------
// Cosine ranking and duplicate removal
// ---------------------------------------------------------------------------

pub fn oracle_cosine(a: &[f32], b: &[f32]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let mut dot = 0.0f64;
    let mut na = 0.0f64;
    let mut nb = 0.0f64;
    for (x, y) in a.iter().zip(b) {
        let (x, y) = (f64::from(*x), f64::from(*y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return None;
    }
    Some((dot / (na.sqrt() * nb.sqrt())).clamp(-1.0, 1.0))
}

/// Full scan: score every row, sort by similarity descending then id ascending.
pub fn brute_force_top_k(rows: &[(String, Vec<f32>)], query: &[f32], k: usize) -> Vec<(String, f64)> {
    let mut scored: Vec<(String, f64)> = rows
        .iter()
        .map(|(id, v)| (id.clone(), oracle_cosine(query, v).expect("non-zero rows")))
        .collect();
    scored.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    scored.truncate(k);
    scored
}

/// Greedy reference: collapse equal normalized index text to the smallest
/// source, then scan in source order dropping any card within `threshold`
/// of one already kept. Returns surviving ids in input order.
pub fn oracle_dedup(cards: &[ExperienceCard], embedder: &HashingEmbedder, threshold: f64) -> Vec<String> {
    let mut by_text: BTreeMap<String, usize> = BTreeMap::new();
    for (i, c) in cards.iter().enumerate() {
        let key = collapse_lower(&c.index_text());
        match by_text.get(&key) {
            Some(&j) if cards[j].source <= c.source => {}
            _ => {
                by_text.insert(key, i);
            }
        }
    }
    let mut order: Vec<usize> = by_text.into_values().collect();
    order.sort_by(|&a, &b| cards[a].source.cmp(&cards[b].source));
    let mut kept: Vec<(usize, Vec<f32>)> = Vec::new();
    let mut keep = vec![false; cards.len()];
    for i in order {
        let v = embed(&cards[i].index_text(), embedder).expect("embeddable").values;
        if v.iter().all(|x| *x == 0.0) {
            keep[i] = true;
            continue;
        }
        if kept.iter().all(|(_, w)| oracle_cosine(&v, w).unwrap() < threshold) {
            keep[i] = true;
            kept.push((i, v));
        }
    }
    (0..cards.len()).filter(|&i| keep[i]).map(|i| cards[i].card_id.clone()).collect()
}

pub fn embedding(text: &str, embedder: &dyn Embedder) -> Vec<f32> {
    embed(text, embedder).expect("embeddable").values
}

// ---------------------------------------------------------------------------
// Diff mutations
// ---------------------------------------------------------------------------

/// A corrupted diff and the 1-based line its error must point at.
pub struct Mutation {
    pub label: &'static str,
    pub text: String,
    pub expected_line: usize,
}

struct HunkSpan {
    header: usize,
    old_start: u64,
    old_len: u64,
    new_start: u64,
    new_len: u64,
    body_end: usize,
}

fn parse_counts(header: &str) -> Option<(u64, u64, u64, u64)> {
    let inner = header.strip_prefix("@@ -")?;
    let (ranges, _) = inner.split_once(" @@")?;
    let (old, new) = ranges.split_once(" +")?;
    let pair = |r: &str| -> Option<(u64, u64)> {
        match r.split_once(',') {
            Some((a, b)) => Some((a.parse().ok()?, b.parse().ok()?)),
            None => Some((r.parse().ok()?, 1)),
        }
    };
    let (os, ol) = pair(old)?;
    let (ns, nl) = pair(new)?;
    Some((os, ol, ns, nl))
}

/// Walks hunks by their declared lengths, the way any unified diff reader must.
fn hunk_spans(lines: &[&str]) -> Vec<HunkSpan> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let is_file_header = lines[i].starts_with("--- ")
            && lines.get(i + 1).is_some_and(|l| l.starts_with("+++ "))
            && lines.get(i + 2).is_some_and(|l| l.starts_with("@@ "));
        if !is_file_header {
            i += 1;
            continue;
        }
        i += 2;
        while let Some((os, ol, ns, nl)) = lines.get(i).and_then(|l| parse_counts(l)) {
            let header = i;
            let (mut old, mut new) = (ol, nl);
            i += 1;
            while old > 0 || new > 0 {
                match lines[i].chars().next() {
                    Some('-') => old -= 1,
                    Some('+') => new -= 1,
                    Some('\\') => {}
                    _ => {
                        old -= 1;
                        new -= 1;
                    }
                }
                i += 1;
            }
            if lines.get(i).is_some_and(|l| l.starts_with('\\')) {
                i += 1;
            }
            out.push(HunkSpan { header, old_start: os, old_len: ol, new_start: ns, new_len: nl, body_end: i });
        }
    }
    out
}

fn file_header_lines(lines: &[&str]) -> Vec<usize> {
    (0..lines.len())
        .filter(|&i| {
            lines[i].starts_with("--- ")
                && lines.get(i + 1).is_some_and(|l| l.starts_with("+++ "))
                && lines.get(i + 2).is_some_and(|l| l.starts_with("@@ "))
        })
        .collect()
}

fn join(lines: &[String]) -> String {
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

/// Ten mutations of each kind, drawn from `corpus`. Count corruption only
/// targets hunks whose body lines cannot be mistaken for file headers or
/// blank separators, so the failure must be reported at the corrupted hunk
/// header.
pub fn adversarial_mutations(corpus: &[String], rng: &mut ChaCha8Rng) -> Vec<Mutation> {
    let mut out = Vec::new();
    let mut attempts = 0;
    let kinds = ["drop +++ line", "drop --- line", "truncate hunk header", "shrink old count", "shrink new count"];
    for kind in kinds {
        let mut made = 0;
        while made < 10 {
            attempts += 1;
            assert!(attempts < 10_000, "corpus too small for mutations");
            let text = corpus.choose(rng).unwrap();
            let lines: Vec<&str> = text.lines().collect();
            let mut owned: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
            let headers = file_header_lines(&lines);
            let spans = hunk_spans(&lines);
            let mutation = match kind {
                "drop +++ line" => {
                    let &h = headers.choose(rng).unwrap();
                    owned.remove(h + 1);
                    Mutation { label: kind, text: join(&owned), expected_line: h + 1 }
                }
                "drop --- line" => {
                    let &h = headers.choose(rng).unwrap();
                    owned.remove(h);
                    Mutation { label: kind, text: join(&owned), expected_line: h + 1 }
                }
                "truncate hunk header" => {
                    let span = spans.choose(rng).unwrap();
                    owned[span.header] = format!("@@ -{},{} +{}", span.old_start, span.old_len, span.new_start);
                    Mutation { label: kind, text: join(&owned), expected_line: span.header + 1 }
                }
                _ => {
                    let shrink_old = kind == "shrink old count";
                    let span = spans.choose(rng).unwrap();
                    let body = &lines[span.header + 1..span.body_end];
                    let ambiguous = body
                        .iter()
                        .any(|l| l.is_empty() || l.starts_with("---") || l.starts_with("+++") || l.starts_with('\\'));
                    let len = if shrink_old { span.old_len } else { span.new_len };
                    if ambiguous || len == 0 {
                        continue;
                    }
                    let (ol, nl) = if shrink_old {
                        (span.old_len - 1, span.new_len)
                    } else {
                        (span.old_len, span.new_len - 1)
                    };
                    owned[span.header] = format!("@@ -{},{ol} +{},{nl} @@", span.old_start, span.new_start);
                    Mutation { label: kind, text: join(&owned), expected_line: span.header + 1 }
                }
            };
            out.push(mutation);
            made += 1;
        }
    }
    out
}

pub fn diff_corpus() -> Vec<String> {
    let dir = fixture("diffs");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("diff corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "diff"))
        .collect();
    paths.sort();
    paths.iter().map(|p| std::fs::read_to_string(p).expect("utf-8 diff")).collect()
}
