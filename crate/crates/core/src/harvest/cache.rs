//! Append-only JSON-lines cache of similarity responses.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One cached model response for an unordered item pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityRecord {
    pub item_a: String,
    pub item_b: String,
    pub model_name: String,
    pub prompt_hash: String,
    pub raw_response: String,
    pub similarity: f64,
    pub timestamp: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CacheKey {
    pub item_a: String,
    pub item_b: String,
    pub model_name: String,
    pub prompt_hash: String,
}

impl SimilarityRecord {
    pub fn key(&self) -> CacheKey {
        CacheKey {
            item_a: self.item_a.clone(),
            item_b: self.item_b.clone(),
            model_name: self.model_name.clone(),
            prompt_hash: self.prompt_hash.clone(),
        }
    }

    fn is_valid(&self) -> bool {
        self.item_a < self.item_b && (0.0..=1.0).contains(&self.similarity)
    }
}

/// Reads every record in `path`; a missing file is an empty cache.
///
/// A malformed final line (an interrupted append) is skipped with a
/// warning; malformed lines elsewhere are errors. The first record for a
/// key wins.
pub fn load_cache(path: &Path) -> Result<HashMap<CacheKey, SimilarityRecord>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(HashMap::new()),
        Err(e) => return Err(Error::io(path, e)),
    };
    let lines: Vec<String> = BufReader::new(file)
        .lines()
        .collect::<std::io::Result<_>>()
        .map_err(|e| Error::io(path, e))?;
    let last = lines.iter().rposition(|l| !l.trim().is_empty());
    let mut records = HashMap::new();
    for (n, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<SimilarityRecord>(line) {
            Ok(rec) if rec.is_valid() => {
                records.entry(rec.key()).or_insert(rec);
            }
            Ok(_) => {
                return Err(Error::format(path, format!("line {}: invalid record", n + 1)));
            }
            Err(e) if Some(n) == last => {
                log::warn!("{}: skipping truncated last line: {e}", path.display());
            }
            Err(e) => return Err(Error::format(path, format!("line {}: {e}", n + 1))),
        }
    }
    Ok(records)
}

/// Single writer appending one record per line, flushed per record.
pub struct CacheWriter {
    path: PathBuf,
    writer: BufWriter<File>,
}

impl CacheWriter {
    /// Opens `path` for appending. An unterminated final line left by an
    /// interrupted write is cut off first so new records start on their
    /// own line.
    pub fn open(path: &Path) -> Result<Self> {
        drop_partial_tail(path)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(path, e))?;
        Ok(CacheWriter {
            path: path.to_path_buf(),
            writer: BufWriter::new(file),
        })
    }

    pub fn append(&mut self, record: &SimilarityRecord) -> Result<()> {
        let line = serde_json::to_string(record)?;
        writeln!(self.writer, "{line}")
            .and_then(|_| self.writer.flush())
            .map_err(|e| Error::io(&self.path, e))
    }
}

fn drop_partial_tail(path: &Path) -> Result<()> {
    let contents = match std::fs::read(path) {
        Ok(c) => c,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(Error::io(path, e)),
    };
    if contents.is_empty() || contents.ends_with(b"\n") {
        return Ok(());
    }
    let keep = contents.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    log::warn!("{}: dropping {} bytes of unterminated last line", path.display(), contents.len() - keep);
    OpenOptions::new()
        .write(true)
        .open(path)
        .and_then(|f| f.set_len(keep as u64))
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(a: &str, b: &str, s: f64) -> SimilarityRecord {
        SimilarityRecord {
            item_a: a.into(),
            item_b: b.into(),
            model_name: "m".into(),
            prompt_hash: "h".into(),
            raw_response: s.to_string(),
            similarity: s,
            timestamp: Utc::now(),
        }
    }

    #[test]
    fn append_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        assert!(load_cache(&path).unwrap().is_empty());
        let mut w = CacheWriter::open(&path).unwrap();
        w.append(&record("a", "b", 0.5)).unwrap();
        w.append(&record("a", "c", 0.25)).unwrap();
        w.append(&record("a", "b", 0.9)).unwrap();
        drop(w);
        let cache = load_cache(&path).unwrap();
        assert_eq!(cache.len(), 2);
        assert_eq!(cache[&record("a", "b", 0.0).key()].similarity, 0.5);
    }

    #[test]
    fn truncated_tail_is_tolerated() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let good = serde_json::to_string(&record("a", "b", 0.5)).unwrap();
        std::fs::write(&path, format!("{good}\n{}", &good[..good.len() / 2])).unwrap();
        assert_eq!(load_cache(&path).unwrap().len(), 1);
        std::fs::write(&path, format!("{}\n{good}\n", &good[..good.len() / 2])).unwrap();
        assert!(load_cache(&path).is_err());
    }

    #[test]
    fn rejects_out_of_range_or_unordered() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        let bad = serde_json::to_string(&record("b", "a", 0.5)).unwrap();
        std::fs::write(&path, format!("{bad}\n{bad}\n")).unwrap();
        assert!(load_cache(&path).is_err());
    }
}
