//! On-disk result cache: one JSON file per record, named by the SHA-256 of
//! the canonical key `{quantity, params, version}`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::record::ResultRecord;

pub const CACHE_ENV: &str = "CIS_CACHE_DIR";
pub const DEFAULT_CACHE_DIR: &str = ".cis-cache";

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn from_env() -> Self {
        Cache::new(std::env::var_os(CACHE_ENV).map_or_else(|| PathBuf::from(DEFAULT_CACHE_DIR), PathBuf::from))
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(quantity: &str, params: &BTreeMap<String, Value>, version: &str) -> String {
        // BTreeMap keys serialize sorted, so the text is canonical.
        let canonical = json!({"quantity": quantity, "params": params, "version": version}).to_string();
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A stored record, flagged `cached`. Unreadable entries are reported on
    /// stderr and treated as misses.
    pub fn get(&self, quantity: &str, params: &BTreeMap<String, Value>, version: &str) -> Option<ResultRecord> {
        let path = self.path(&Self::key(quantity, params, version));
        let text = fs::read_to_string(&path).ok()?;
        match serde_json::from_str::<ResultRecord>(&text) {
            Ok(mut rec) if rec.quantity == quantity && rec.params == *params && rec.meta.version == version => {
                rec.meta.cached = true;
                Some(rec)
            }
            Ok(_) => {
                eprintln!("warning: cache entry {} does not match its key; recomputing", path.display());
                None
            }
            Err(e) => {
                eprintln!("warning: ignoring corrupt cache entry {}: {e}", path.display());
                None
            }
        }
    }

    /// Writes to a temporary file in the cache directory, then renames it
    /// into place so readers never observe a partial record.
    pub fn put(&self, record: &ResultRecord) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let key = Self::key(&record.quantity, &record.params, &record.meta.version);
        let mut stored = record.clone();
        stored.meta.cached = false;
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        let mut file = fs::File::create(&tmp)?;
        file.write_all(serde_json::to_string_pretty(&stored)?.as_bytes())?;
        file.sync_all()?;
        fs::rename(&tmp, self.path(&key))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultRecord {
        ResultRecord::new("l1-exact", 3.5).param("m", 6)
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let rec = sample();
        assert!(cache.get(&rec.quantity, &rec.params, &rec.meta.version).is_none());
        cache.put(&rec).unwrap();
        let hit = cache.get(&rec.quantity, &rec.params, &rec.meta.version).unwrap();
        assert!(hit.meta.cached);
        assert_eq!(hit.value, rec.value);
        assert!(cache.get(&rec.quantity, &rec.params, "9.9.9").is_none());
        let other = sample().param("m", 7);
        assert!(cache.get(&other.quantity, &other.params, &other.meta.version).is_none());
    }

    #[test]
    fn corrupt_entries_are_misses() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let rec = sample();
        let key = Cache::key(&rec.quantity, &rec.params, &rec.meta.version);
        fs::write(dir.path().join(format!("{key}.json")), "{ not json").unwrap();
        assert!(cache.get(&rec.quantity, &rec.params, &rec.meta.version).is_none());
        cache.put(&rec).unwrap();
        assert!(cache.get(&rec.quantity, &rec.params, &rec.meta.version).is_some());
    }

    #[test]
    fn keys_are_stable() {
        let a = sample();
        let b = ResultRecord::new("l1-exact", 0.0).param("m", 6);
        assert_eq!(
            Cache::key(&a.quantity, &a.params, "1"),
            Cache::key(&b.quantity, &b.params, "1")
        );
        assert_eq!(Cache::key(&a.quantity, &a.params, "1").len(), 64);
    }
}
