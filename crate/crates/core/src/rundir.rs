//! Run directory: a root with one subdirectory per artifact kind. Every
//! artifact is written next to a `<name>.manifest.json` recording its content
//! hash, the hashes of its inputs, a configuration snapshot and a timestamp.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use chrono::{DateTime, Utc};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::hashing::sha256_hex;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArtifactKind {
    Corpora,
    Checkpoints,
    Predictions,
    Reports,
    Plans,
}

impl ArtifactKind {
    pub const ALL: [ArtifactKind; 5] = [
        ArtifactKind::Corpora,
        ArtifactKind::Checkpoints,
        ArtifactKind::Predictions,
        ArtifactKind::Reports,
        ArtifactKind::Plans,
    ];

    pub fn dir_name(self) -> &'static str {
        match self {
            ArtifactKind::Corpora => "corpora",
            ArtifactKind::Checkpoints => "checkpoints",
            ArtifactKind::Predictions => "predictions",
            ArtifactKind::Reports => "reports",
            ArtifactKind::Plans => "plans",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub artifact: String,
    pub sha256: String,
    pub inputs: BTreeMap<String, String>,
    pub config: serde_json::Value,
    pub created: DateTime<Utc>,
    pub tool_version: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunDirectory {
    root: PathBuf,
}

const FAILED_SUFFIX: &str = ".failed";

impl RunDirectory {
    /// Opens `root`, creating it and its subdirectories as needed.
    pub fn create(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        for kind in ArtifactKind::ALL {
            let dir = root.join(kind.dir_name());
            fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        }
        Ok(RunDirectory { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, kind: ArtifactKind, name: &str) -> PathBuf {
        self.root.join(kind.dir_name()).join(name)
    }

    fn manifest_path(&self, kind: ArtifactKind, name: &str) -> PathBuf {
        self.path(kind, &format!("{name}.manifest.json"))
    }

    /// Writes an artifact and its manifest. The artifact goes through a
    /// temporary file so readers never see a partial write.
    pub fn write_artifact<C: Serialize>(
        &self,
        kind: ArtifactKind,
        name: &str,
        bytes: &[u8],
        inputs: &BTreeMap<String, String>,
        config: &C,
    ) -> Result<PathBuf> {
        let path = self.path(kind, name);
        write_atomic(&path, bytes)?;
        let manifest = Manifest {
            artifact: format!("{}/{name}", kind.dir_name()),
            sha256: sha256_hex(bytes),
            inputs: inputs.clone(),
            config: serde_json::to_value(config)?,
            created: Utc::now(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        let mpath = self.manifest_path(kind, name);
        write_atomic(&mpath, serde_json::to_string_pretty(&manifest)?.as_bytes())?;
        Ok(path)
    }

    pub fn write_json<T: Serialize, C: Serialize>(
        &self,
        kind: ArtifactKind,
        name: &str,
        value: &T,
        inputs: &BTreeMap<String, String>,
        config: &C,
    ) -> Result<PathBuf> {
        let bytes = serde_json::to_vec_pretty(value)?;
        self.write_artifact(kind, name, &bytes, inputs, config)
    }

    pub fn read_manifest(&self, kind: ArtifactKind, name: &str) -> Result<Option<Manifest>> {
        let path = self.manifest_path(kind, name);
        match fs::read_to_string(&path) {
            Ok(text) => Ok(Some(serde_json::from_str(&text)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    /// The artifact's bytes, if it exists, its content matches its manifest,
    /// and the manifest records the same inputs and configuration.
    pub fn fresh_artifact<C: Serialize>(
        &self,
        kind: ArtifactKind,
        name: &str,
        inputs: &BTreeMap<String, String>,
        config: &C,
    ) -> Result<Option<Vec<u8>>> {
        let Some(manifest) = self.read_manifest(kind, name)? else {
            return Ok(None);
        };
        if &manifest.inputs != inputs || manifest.config != serde_json::to_value(config)? {
            return Ok(None);
        }
        let path = self.path(kind, name);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Error::io(&path, e)),
        };
        Ok((sha256_hex(&bytes) == manifest.sha256).then_some(bytes))
    }

    pub fn fresh_json<T: DeserializeOwned, C: Serialize>(
        &self,
        kind: ArtifactKind,
        name: &str,
        inputs: &BTreeMap<String, String>,
        config: &C,
    ) -> Result<Option<T>> {
        match self.fresh_artifact(kind, name, inputs, config)? {
            Some(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            None => Ok(None),
        }
    }

    pub fn mark_failed(&self, kind: ArtifactKind, name: &str, message: &str) -> Result<()> {
        let path = self.path(kind, &format!("{name}{FAILED_SUFFIX}"));
        fs::write(&path, message).map_err(|e| Error::io(&path, e))
    }

    pub fn clear_failed(&self, kind: ArtifactKind, name: &str) -> Result<()> {
        let path = self.path(kind, &format!("{name}{FAILED_SUFFIX}"));
        match fs::remove_file(&path) {
            Ok(()) => Ok(()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(()),
            Err(e) => Err(Error::io(&path, e)),
        }
    }

    pub fn failure(&self, kind: ArtifactKind, name: &str) -> Option<String> {
        fs::read_to_string(self.path(kind, &format!("{name}{FAILED_SUFFIX}"))).ok()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    static COUNTER: AtomicUsize = AtomicUsize::new(0);
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(
        ".{}.{}.tmp",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}
