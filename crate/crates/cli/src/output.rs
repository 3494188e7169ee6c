//! Output directories, file digests and run manifests.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use filament_core::geometry::HolderExponent;
use filament_core::io::{area_from_csv, loop_from_csv};
use filament_core::rough::RoughLoop;

use crate::config::{hex, RunConfig};

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
}

/// Collects the files of one command so the manifest can list them with digests.
pub struct Output {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Output {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// `name` may contain `/` for subdirectories.
    pub fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).with_context(|| format!("cannot create {}", parent.display()))?;
        }
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        self.files.push(FileEntry {
            name: name.to_string(),
            sha256: hex(&Sha256::digest(contents.as_bytes())),
        });
        log::debug!("wrote {}", path.display());
        Ok(())
    }

    /// Writes `manifest.json` from the common header, `body` and the file list.
    pub fn finish(mut self, command: &str, cfg: &RunConfig, body: Value) -> Result<()> {
        let mut m = Map::new();
        m.insert("command".into(), json!(command));
        m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        m.insert("config".into(), json!(cfg.entries()));
        m.insert("config_hash".into(), json!(cfg.hash()));
        m.insert("seed".into(), json!(cfg.seed()?));
        if let Value::Object(b) = body {
            m.extend(b);
        }
        m.insert("files".into(), serde_json::to_value(std::mem::take(&mut self.files))?);
        let text = serde_json::to_string_pretty(&Value::Object(m))? + "\n";
        let path = self.dir.join(MANIFEST);
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        log::info!("manifest {}", path.display());
        Ok(())
    }
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn read_manifest(dir: &Path) -> Result<Value> {
    let path = dir.join(MANIFEST);
    serde_json::from_str(&read_text(&path)?).with_context(|| format!("malformed manifest {}", path.display()))
}

pub fn manifest_f64(m: &Value, key: &str, dir: &Path) -> Result<f64> {
    m.get(key)
        .and_then(Value::as_f64)
        .ok_or_else(|| anyhow!("manifest in {} lacks numeric field `{key}`", dir.display()))
}

/// A rough loop stored as a loop CSV plus area CSV in `dir`.
pub fn read_rough_loop(dir: &Path, loop_file: &str, area_file: &str, gamma: f64) -> Result<RoughLoop<f64>> {
    let lp_path = dir.join(loop_file);
    let lp = loop_from_csv(&read_text(&lp_path)?).with_context(|| format!("in {}", lp_path.display()))?;
    let area_path = dir.join(area_file);
    let area = area_from_csv(&read_text(&area_path)?).with_context(|| format!("in {}", area_path.display()))?;
    Ok(RoughLoop::new(lp, area, HolderExponent::new(gamma)?)?)
}
