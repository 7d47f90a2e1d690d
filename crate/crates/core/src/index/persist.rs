//! On-disk layout of a memory store directory:
//!
//! - `cards.jsonl`: one card per line, in indexing order.
//! - `vectors.bin`: `MEMGIDX1`, u32 count, u32 dimension, count × dimension
//!   f32 rows, then a u64 FNV-1a checksum of every preceding byte. All
//!   integers and floats little-endian.
//! - `manifest.json`: format version, dimension, count, embedder id.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::store::MemoryStore;
use crate::card::ExperienceCard;
use crate::{fnv1a64, Fnv1a64};

pub const FORMAT_VERSION: u32 = 1;
pub const VECTOR_MAGIC: &[u8; 8] = b"MEMGIDX1";
pub const CARDS_FILE: &str = "cards.jsonl";
pub const VECTORS_FILE: &str = "vectors.bin";
pub const MANIFEST_FILE: &str = "manifest.json";

const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub dimension: usize,
    pub count: usize,
    pub embedder_id: String,
}

#[derive(Debug, Error)]
pub enum PersistError {
    #[error("no store at {0}")]
    NotFound(PathBuf),
    #[error("unsupported store format version {found} (expected {expected})")]
    Version { found: u32, expected: u32 },
    #[error("{file} is truncated: {detail}")]
    Truncated { file: &'static str, detail: String },
    #[error("{VECTORS_FILE} checksum mismatch: stored {stored:016x}, computed {computed:016x}")]
    Checksum { stored: u64, computed: u64 },
    #[error("{file}: {detail}")]
    Corrupt { file: &'static str, detail: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> PersistError + '_ {
    move |source| PersistError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read(path: &Path) -> Result<Vec<u8>, PersistError> {
    fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => PersistError::NotFound(path.to_path_buf()),
        _ => io_err(path)(e),
    })
}

pub fn save_store(store: &MemoryStore, dir: &Path) -> Result<(), PersistError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let cards_path = dir.join(CARDS_FILE);
    let mut w = BufWriter::new(fs::File::create(&cards_path).map_err(io_err(&cards_path))?);
    for card in store.cards() {
        writeln!(w, "{}", card.to_json_line()).map_err(io_err(&cards_path))?;
    }
    w.flush().map_err(io_err(&cards_path))?;

    let vectors_path = dir.join(VECTORS_FILE);
    let raw = store.raw_vectors();
    let mut bytes = Vec::with_capacity(HEADER_LEN + raw.len() * 4 + 8);
    bytes.extend_from_slice(VECTOR_MAGIC);
    bytes.extend_from_slice(&(store.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&(store.dimension() as u32).to_le_bytes());
    for v in raw {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let checksum = fnv1a64(&bytes);
    bytes.extend_from_slice(&checksum.to_le_bytes());
    fs::write(&vectors_path, bytes).map_err(io_err(&vectors_path))?;

    // The manifest goes last so a partially written directory fails to load.
    let manifest = Manifest {
        format_version: FORMAT_VERSION,
        dimension: store.dimension(),
        count: store.len(),
        embedder_id: store.embedder_id().to_string(),
    };
    let manifest_path = dir.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serialization is infallible");
    fs::write(&manifest_path, json + "\n").map_err(io_err(&manifest_path))
}

pub fn read_manifest(dir: &Path) -> Result<Manifest, PersistError> {
    if !dir.is_dir() {
        return Err(PersistError::NotFound(dir.to_path_buf()));
    }
    let bytes = read(&dir.join(MANIFEST_FILE))?;
    let value: serde_json::Value = serde_json::from_slice(&bytes).map_err(|e| PersistError::Corrupt {
        file: MANIFEST_FILE,
        detail: e.to_string(),
    })?;
    if let Some(found) = value.get("format_version").and_then(|v| v.as_u64()) {
        if found != u64::from(FORMAT_VERSION) {
            return Err(PersistError::Version {
                found: found.min(u64::from(u32::MAX)) as u32,
                expected: FORMAT_VERSION,
            });
        }
    }
    serde_json::from_value(value).map_err(|e| PersistError::Corrupt {
        file: MANIFEST_FILE,
        detail: e.to_string(),
    })
}

/// Decodes `vectors.bin`, verifying the checksum before anything else is trusted.
pub fn decode_vectors(bytes: &[u8]) -> Result<(usize, usize, Vec<f32>), PersistError> {
    let truncated = |detail: String| PersistError::Truncated {
        file: VECTORS_FILE,
        detail,
    };
    if bytes.len() < HEADER_LEN + 8 {
        return Err(truncated(format!("{} bytes is shorter than header and checksum", bytes.len())));
    }
    if &bytes[..8] != VECTOR_MAGIC {
        return Err(PersistError::Corrupt {
            file: VECTORS_FILE,
            detail: "bad magic bytes".into(),
        });
    }
    let count = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let dimension = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let body = count
        .checked_mul(dimension)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| truncated("header sizes overflow".into()))?;
    let expected = HEADER_LEN + body + 8;
    if bytes.len() < expected {
        return Err(truncated(format!("expected {expected} bytes, found {}", bytes.len())));
    }
    if bytes.len() > expected {
        return Err(PersistError::Corrupt {
            file: VECTORS_FILE,
            detail: format!("{} trailing bytes", bytes.len() - expected),
        });
    }
    let (payload, tail) = bytes.split_at(expected - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    let mut h = Fnv1a64::default();
    h.update(payload);
    if h.finish() != stored {
        return Err(PersistError::Checksum {
            stored,
            computed: h.finish(),
        });
    }
    let values = payload[HEADER_LEN..]
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((count, dimension, values))
}

pub fn load_store(dir: &Path) -> Result<MemoryStore, PersistError> {
    let manifest = read_manifest(dir)?;
    let (count, dimension, values) = decode_vectors(&read(&dir.join(VECTORS_FILE))?)?;
    if count != manifest.count || dimension != manifest.dimension {
        return Err(PersistError::Corrupt {
            file: VECTORS_FILE,
            detail: format!(
                "holds {count}×{dimension}, manifest says {}×{}",
                manifest.count, manifest.dimension
            ),
        });
    }

    let text = read(&dir.join(CARDS_FILE))?;
    let text = String::from_utf8(text).map_err(|e| PersistError::Corrupt {
        file: CARDS_FILE,
        detail: e.to_string(),
    })?;
    let mut cards: Vec<ExperienceCard> = Vec::with_capacity(count);
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let card = serde_json::from_str(line).map_err(|e| PersistError::Corrupt {
            file: CARDS_FILE,
            detail: format!("line {}: {e}", i + 1),
        })?;
        cards.push(card);
    }
    if cards.len() < count {
        return Err(PersistError::Truncated {
            file: CARDS_FILE,
            detail: format!("{} cards, manifest says {count}", cards.len()),
        });
    }
    if cards.len() > count {
        return Err(PersistError::Corrupt {
            file: CARDS_FILE,
            detail: format!("{} cards, manifest says {count}", cards.len()),
        });
    }
    MemoryStore::from_parts(manifest.embedder_id, dimension, cards, values)
        .map_err(|detail| PersistError::Corrupt { file: VECTORS_FILE, detail })
}
