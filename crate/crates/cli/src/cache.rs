//! On-disk result cache.
//!
//! One JSON file per key, named by the SHA-256 of the key. Each file records
//! the engine version and the full key; entries written by another engine
//! version are ignored, and unreadable entries are reported and recomputed.
//! Writes go to a temporary file that is renamed into place, so readers never
//! see a partial entry.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ford_core::ENGINE_VERSION;

#[derive(Serialize, Deserialize)]
struct Entry<T> {
    engine_version: String,
    key: String,
    record: T,
}

pub struct Cache {
    dir: PathBuf,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, key: &str) -> PathBuf {
        let digest = Sha256::digest(key.as_bytes());
        let name: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        self.dir.join(format!("{name}.json"))
    }

    pub fn load<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let path = self.path_for(key);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return None,
            Err(e) => {
                warn(&path, &e.to_string());
                return None;
            }
        };
        match serde_json::from_slice::<Entry<T>>(&bytes) {
            Ok(entry) if entry.engine_version == ENGINE_VERSION && entry.key == key => Some(entry.record),
            Ok(_) => None,
            Err(e) => {
                warn(&path, &e.to_string());
                None
            }
        }
    }

    pub fn store<T: Serialize>(&self, key: &str, record: &T) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let path = self.path_for(key);
        let entry = Entry { engine_version: ENGINE_VERSION.to_string(), key: key.to_string(), record };
        let bytes = serde_json::to_vec(&entry).map_err(io::Error::other)?;
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(&bytes)?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path).inspect_err(|_| {
            let _ = fs::remove_file(&tmp);
        })
    }
}

fn warn(path: &Path, reason: &str) {
    let msg = serde_json::json!({
        "warning": "cache-entry-unreadable",
        "path": path.display().to_string(),
        "reason": reason,
    });
    eprintln!("{msg}");
}
