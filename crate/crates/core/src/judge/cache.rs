//! Content-addressed response cache: one file per key holding a one-line
//! JSON metadata header followed by the raw response bytes.

use crate::judge::JudgeError;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

const MAGIC: &str = "pcfjudge-cache/1";

/// Hex SHA-256 over (model id, template version, prompt text).
pub fn cache_key(model_id: &str, template_version: &str, prompt: &str) -> String {
    let mut h = Sha256::new();
    for part in [model_id, template_version, prompt] {
        h.update((part.len() as u64).to_le_bytes());
        h.update(part.as_bytes());
    }
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheMetadata {
    pub model: String,
    pub template_version: String,
    pub created_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedResponse {
    pub metadata: CacheMetadata,
    pub raw: String,
}

#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, JudgeError> {
        let dir = dir.into();
        fs::create_dir_all(&dir)
            .map_err(|e| JudgeError::Cache(format!("cannot create {}: {e}", dir.display())))?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> Result<PathBuf, JudgeError> {
        if key.is_empty() || !key.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(JudgeError::Cache(format!("invalid cache key {key:?}")));
        }
        Ok(self.dir.join(format!("{key}.resp")))
    }

    pub fn get(&self, key: &str) -> Result<Option<CachedResponse>, JudgeError> {
        let path = self.path_for(key)?;
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(JudgeError::Cache(format!("{}: {e}", path.display()))),
        };
        let text = String::from_utf8(bytes)
            .map_err(|_| JudgeError::Cache(format!("{}: not UTF-8", path.display())))?;
        let corrupt = || JudgeError::Cache(format!("{}: corrupt cache entry", path.display()));
        let (magic, rest) = text.split_once('\n').ok_or_else(corrupt)?;
        if magic != MAGIC {
            return Err(corrupt());
        }
        let (header, raw) = rest.split_once('\n').ok_or_else(corrupt)?;
        let metadata: CacheMetadata = serde_json::from_str(header).map_err(|_| corrupt())?;
        Ok(Some(CachedResponse {
            metadata,
            raw: raw.to_string(),
        }))
    }

    /// Writes through a temp file and rename so readers never see a partial entry.
    pub fn put(&self, key: &str, metadata: &CacheMetadata, raw: &str) -> Result<(), JudgeError> {
        let path = self.path_for(key)?;
        let err = |e: std::io::Error| JudgeError::Cache(format!("{}: {e}", path.display()));
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(err)?;
        let header = serde_json::to_string(metadata).expect("metadata serializes");
        write!(tmp, "{MAGIC}\n{header}\n{raw}").map_err(err)?;
        tmp.persist(&path).map_err(|e| err(e.error))?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|rd| {
                rd.filter_map(Result::ok)
                    .filter(|e| e.path().extension().is_some_and(|x| x == "resp"))
                    .count()
            })
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
