//! Content-addressed translation cache.
//!
//! On disk the cache is a directory holding `ledger.jsonl`, an append-only
//! log of entries, and `index.json`, a summary of the ledger (entry count and
//! byte length) rewritten on [`TranslationCache::flush`]. Opening replays the
//! ledger; a truncated last line left by an interrupted write is dropped.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};

use crate::hashing::sha256_hex;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub backend: String,
    pub source: String,
    pub target: String,
    pub text_sha256: String,
}

impl CacheKey {
    pub fn new(backend: &str, source: &str, target: &str, text: &str) -> Self {
        CacheKey {
            backend: backend.to_string(),
            source: source.to_string(),
            target: target.to_string(),
            text_sha256: sha256_hex(text.as_bytes()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct LedgerEntry {
    #[serde(flatten)]
    key: CacheKey,
    translation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheIndex {
    pub entries: usize,
    pub ledger_bytes: u64,
}

const LEDGER: &str = "ledger.jsonl";
const INDEX: &str = "index.json";

/// Concurrent readers, serialized writers.
#[derive(Debug)]
pub struct TranslationCache {
    dir: Option<PathBuf>,
    entries: RwLock<HashMap<CacheKey, String>>,
    ledger: Mutex<Option<File>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl TranslationCache {
    pub fn in_memory() -> Self {
        TranslationCache {
            dir: None,
            entries: RwLock::new(HashMap::new()),
            ledger: Mutex::new(None),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        }
    }

    pub fn open(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let ledger_path = dir.join(LEDGER);
        let mut entries = HashMap::new();
        if ledger_path.exists() {
            let text =
                std::fs::read_to_string(&ledger_path).map_err(|e| Error::io(&ledger_path, e))?;
            let mut valid_bytes = 0usize;
            let lines: Vec<&str> = text.split_inclusive('\n').collect();
            let last = lines.len();
            for (i, raw) in lines.iter().enumerate() {
                let line = raw.trim_end_matches('\n');
                if line.trim().is_empty() {
                    valid_bytes += raw.len();
                    continue;
                }
                match serde_json::from_str::<LedgerEntry>(line) {
                    Ok(entry) if raw.ends_with('\n') => {
                        entries.insert(entry.key, entry.translation);
                        valid_bytes += raw.len();
                    }
                    _ if i + 1 == last => {
                        log::warn!(
                            "dropping truncated final entry in {}",
                            ledger_path.display()
                        );
                    }
                    Ok(_) => unreachable!("only the last line can lack a newline"),
                    Err(e) => {
                        return Err(Error::Parse {
                            line: i + 1,
                            message: format!("{}: {e}", ledger_path.display()),
                        })
                    }
                }
            }
            if valid_bytes < text.len() {
                let f = OpenOptions::new()
                    .write(true)
                    .open(&ledger_path)
                    .map_err(|e| Error::io(&ledger_path, e))?;
                f.set_len(valid_bytes as u64)
                    .map_err(|e| Error::io(&ledger_path, e))?;
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&ledger_path)
            .map_err(|e| Error::io(&ledger_path, e))?;
        Ok(TranslationCache {
            dir: Some(dir.to_path_buf()),
            entries: RwLock::new(entries),
            ledger: Mutex::new(Some(file)),
            hits: AtomicUsize::new(0),
            misses: AtomicUsize::new(0),
        })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hits(&self) -> usize {
        self.hits.load(Ordering::Relaxed)
    }

    pub fn misses(&self) -> usize {
        self.misses.load(Ordering::Relaxed)
    }

    pub fn get(&self, key: &CacheKey) -> Option<String> {
        let found = self.entries.read().expect("cache lock").get(key).cloned();
        if found.is_some() {
            self.hits.fetch_add(1, Ordering::Relaxed);
        } else {
            self.misses.fetch_add(1, Ordering::Relaxed);
        }
        found
    }

    /// Stores a batch of translations and appends them to the ledger.
    pub fn insert_all(&self, items: Vec<(CacheKey, String)>) -> Result<()> {
        let mut ledger = self.ledger.lock().expect("ledger lock");
        if let Some(file) = ledger.as_mut() {
            let mut buf = String::new();
            for (key, translation) in &items {
                let entry = LedgerEntry {
                    key: key.clone(),
                    translation: translation.clone(),
                };
                buf.push_str(&serde_json::to_string(&entry)?);
                buf.push('\n');
            }
            let path = self.dir.as_ref().expect("disk cache has a dir").join(LEDGER);
            file.write_all(buf.as_bytes()).map_err(|e| Error::io(&path, e))?;
        }
        let mut entries = self.entries.write().expect("cache lock");
        entries.extend(items);
        Ok(())
    }

    pub fn insert(&self, key: CacheKey, translation: String) -> Result<()> {
        self.insert_all(vec![(key, translation)])
    }

    /// Flushes the ledger and rewrites the index.
    pub fn flush(&self) -> Result<Option<CacheIndex>> {
        let Some(dir) = &self.dir else {
            return Ok(None);
        };
        let mut ledger = self.ledger.lock().expect("ledger lock");
        let ledger_path = dir.join(LEDGER);
        if let Some(file) = ledger.as_mut() {
            file.flush().map_err(|e| Error::io(&ledger_path, e))?;
            file.sync_data().map_err(|e| Error::io(&ledger_path, e))?;
        }
        let ledger_bytes = std::fs::metadata(&ledger_path)
            .map_err(|e| Error::io(&ledger_path, e))?
            .len();
        let index = CacheIndex {
            entries: self.len(),
            ledger_bytes,
        };
        let index_path = dir.join(INDEX);
        std::fs::write(&index_path, serde_json::to_string_pretty(&index)?)
            .map_err(|e| Error::io(&index_path, e))?;
        Ok(Some(index))
    }

    pub fn read_index(dir: impl AsRef<Path>) -> Result<Option<CacheIndex>> {
        let path = dir.as_ref().join(INDEX);
        if !path.exists() {
            return Ok(None);
        }
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(Some(serde_json::from_str(&text)?))
    }
}

impl Drop for TranslationCache {
    fn drop(&mut self) {
        if let Err(e) = self.flush() {
            log::warn!("failed to flush translation cache: {e}");
        }
    }
}
