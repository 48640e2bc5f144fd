//! Artifact layout inside the output directory and small file helpers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::stages::{Stage, StageError};

pub const CORPUS: &str = "corpus.jsonl";
pub const CORPUS_MANIFEST: &str = "corpus_manifest.json";
pub const PARSED: &str = "parsed.jsonl";
pub const PARSE_MANIFEST: &str = "parse_manifest.json";
pub const SPLITS: &str = "splits";
pub const EMBEDDINGS: &str = "embeddings";
pub const FEATURES: &str = "features";
pub const SEARCH: &str = "search";
pub const EVAL: &str = "eval";
pub const MODELS: &str = "models";
pub const MANIFEST: &str = "manifest.json";
pub const STATUS: &str = "status.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Content key of a producing configuration: hash of its JSON form.
pub fn content_key<T: Serialize>(value: &T) -> String {
    sha256_hex(serde_json::to_string(value).expect("serialisable").as_bytes())
}

pub fn file_sha256(path: &Path) -> Result<String, StageError> {
    let bytes = fs::read(path).map_err(|e| StageError::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

pub fn ensure_dir(path: &Path) -> Result<(), StageError> {
    fs::create_dir_all(path).map_err(|e| StageError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), StageError> {
    if let Some(dir) = path.parent() {
        ensure_dir(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("serialisable");
    text.push('\n');
    fs::write(path, text).map_err(|e| StageError::io(path, e))
}

/// Reads an artifact produced by `producer`; a missing file asks for that
/// stage to be run first.
pub fn read_json<T: DeserializeOwned>(path: &Path, producer: Stage) -> Result<T, StageError> {
    require(path, producer)?;
    let text = fs::read_to_string(path).map_err(|e| StageError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| StageError::Failed(format!("{}: {e}", path.display())))
}

pub fn require(path: &Path, producer: Stage) -> Result<(), StageError> {
    if path.exists() {
        Ok(())
    } else {
        Err(StageError::Missing {
            needs: producer,
            path: path.to_path_buf(),
        })
    }
}

pub fn article_file(dir: &Path, article: &str) -> PathBuf {
    dir.join(format!("{article}.json"))
}
