//! Persistent record of computed values, keyed by canonical invariant text.
//!
//! Values in a cache are never trusted blindly: every command recomputes what it prints and
//! compares against what is stored. A disagreement means some run was nondeterministic or the
//! file was edited, and is reported as a conflict.

use std::collections::BTreeMap;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use qgw_core::rings::Rational;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheFile {
    pub version: u32,
    /// Which engine and target the keys belong to, e.g. `qk:r=1:standard`.
    pub theory: String,
    pub entries: BTreeMap<String, String>,
}

impl CacheFile {
    pub fn new(theory: &str) -> Self {
        Self { version: VERSION, theory: theory.to_string(), entries: BTreeMap::new() }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self, CliError> {
        let file: CacheFile = serde_json::from_str(text)
            .map_err(|e| CliError::Usage(format!("corrupt cache {}: {e}", origin.display())))?;
        if file.version != VERSION {
            return Err(CliError::Usage(format!(
                "cache {} has version {}, expected {VERSION}",
                origin.display(),
                file.version
            )));
        }
        Ok(file)
    }

    /// Adds entries, refusing to replace a stored value by a different one.
    pub fn merge(&mut self, entries: &BTreeMap<String, String>) -> Result<(), CliError> {
        for (key, value) in entries {
            match self.entries.get(key) {
                Some(old) if !same_value(old, value)? => {
                    return Err(CliError::Conflict(format!("{key}: cache holds {old}, computed {value}")))
                }
                Some(_) => {}
                None => {
                    self.entries.insert(key.clone(), value.clone());
                }
            }
        }
        Ok(())
    }

    fn check_theory(&self, theory: &str, origin: &Path) -> Result<(), CliError> {
        if self.theory != theory {
            return Err(CliError::Usage(format!(
                "cache {} holds {} values, not {theory}",
                origin.display(),
                self.theory
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("plain data serializes");
        text.push('\n');
        text
    }
}

pub struct Cache {
    path: PathBuf,
}

impl Cache {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    /// The stored file, or `None` if it does not exist yet.
    pub fn load(&self) -> Result<Option<CacheFile>, CliError> {
        match fs::read_to_string(&self.path) {
            Ok(text) => CacheFile::parse(&text, &self.path).map(Some),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(CliError::Io(format!("{}: {e}", self.path.display()))),
        }
    }

    pub fn load_for(&self, theory: &str) -> Result<CacheFile, CliError> {
        match self.load()? {
            Some(file) => {
                file.check_theory(theory, &self.path)?;
                Ok(file)
            }
            None => Ok(CacheFile::new(theory)),
        }
    }

    /// Merges `entries` into the file on disk under an exclusive lock, then replaces the file
    /// atomically. Concurrent writers serialize on the lock and each sees the other's entries.
    pub fn store(&self, theory: &str, entries: &BTreeMap<String, String>) -> Result<CacheFile, CliError> {
        let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", self.path.display()));
        let lock_path = lock_path(&self.path);
        let lock = OpenOptions::new().create(true).truncate(false).write(true).open(&lock_path).map_err(io)?;
        lock.lock().map_err(io)?;
        let mut file = self.load_for(theory)?;
        file.merge(entries)?;
        let dir = match self.path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io)?;
        tmp.write_all(file.to_json().as_bytes()).map_err(io)?;
        tmp.as_file().sync_all().map_err(io)?;
        tmp.persist(&self.path).map_err(|e| io(e.error))?;
        lock.unlock().map_err(io)?;
        Ok(file)
    }
}

/// Exact comparison of two rational strings; `2/2` and `1` are the same value.
fn same_value(a: &str, b: &str) -> Result<bool, CliError> {
    let parse = |s: &str| {
        s.parse::<Rational>().map_err(|_| CliError::Usage(format!("cache value {s:?} is not an exact rational")))
    };
    Ok(parse(a)? == parse(b)?)
}

fn lock_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".lock");
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entries(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn store_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().join("c.json"));
        assert_eq!(cache.load().unwrap(), None);
        assert!(cache.load_for("qk:r=1:standard").unwrap().entries.is_empty());
        let stored = cache.store("qk:r=1:standard", &entries(&[("(e1, e1) @ d=2", "1")])).unwrap();
        assert_eq!(cache.load().unwrap(), Some(stored));
        let merged =
            cache.store("qk:r=1:standard", &entries(&[("(e0) @ d=1", "1"), ("(e1, e1) @ d=2", "2/2")])).unwrap();
        assert_eq!(merged.entries.len(), 2);
        assert_eq!(merged.entries["(e1, e1) @ d=2"], "1");
    }

    #[test]
    fn conflicts_and_foreign_theories() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        let cache = Cache::new(&path);
        cache.store("qk:r=1:standard", &entries(&[("(e1, e1) @ d=2", "2/1")])).unwrap();
        assert!(matches!(
            cache.store("qk:r=1:standard", &entries(&[("(e1, e1) @ d=2", "1")])),
            Err(CliError::Conflict(_))
        ));
        assert!(matches!(cache.store("gw:r=2", &BTreeMap::new()), Err(CliError::Usage(_))));
        fs::write(&path, "{").unwrap();
        assert!(matches!(cache.load(), Err(CliError::Usage(_))));
    }
}
