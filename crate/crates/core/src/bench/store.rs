//! Per-network artifact directories. Files are written through a temporary
//! name and renamed, so an interrupted run never leaves a torn record.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone)]
pub struct ArtifactStore {
    root: PathBuf,
    resume: bool,
}

impl ArtifactStore {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self {
            root: root.into(),
            resume: true,
        }
    }

    /// With `false`, finished records are recomputed and overwritten.
    pub fn resuming(mut self, resume: bool) -> Self {
        self.resume = resume;
        self
    }

    pub fn resume(&self) -> bool {
        self.resume
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn network_dir(&self, index: usize) -> PathBuf {
        self.root.join("networks").join(format!("net-{index:03}"))
    }

    pub fn write_bytes(&self, path: &Path, bytes: &[u8]) -> Result<()> {
        write_atomic(path, bytes)
    }

    pub fn write_json<T: Serialize>(&self, path: &Path, value: &T) -> Result<()> {
        write_atomic(path, to_json(value)?.as_bytes())
    }

    /// `None` when the file is absent or unreadable as `T`.
    pub fn read_json<T: DeserializeOwned>(&self, path: &Path) -> Option<T> {
        let text = fs::read_to_string(path).ok()?;
        serde_json::from_str(&text).ok()
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
