//! Artifact writing with embedded provenance.
//!
//! Every CSV starts with one `#` comment line carrying the tool version,
//! command, config digest and seed. A `<artifact>.meta.json` sidecar holds the
//! same fields plus the fully resolved config, and can be passed back through
//! `--config` to reproduce the artifact.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const TOOL: &str = "adaptrial";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Provenance of one run.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub command: &'static str,
    pub seed: u64,
    pub digest: String,
    config: serde_json::Value,
}

impl Provenance {
    pub fn new<C: Serialize>(command: &'static str, seed: u64, config: &C) -> Result<Self, CliError> {
        let config = serde_json::to_value(config).map_err(|e| CliError::Runtime(e.to_string()))?;
        let canonical = serde_json::to_vec(&config).map_err(|e| CliError::Runtime(e.to_string()))?;
        let digest = hex::encode(Sha256::digest(&canonical));
        Ok(Self { command, seed, digest, config })
    }

    pub fn comment_line(&self) -> String {
        format!(
            "# {TOOL} {VERSION} command={} config_sha256={} seed={}\n",
            self.command, self.digest, self.seed
        )
    }

    fn sidecar(&self) -> Result<Vec<u8>, CliError> {
        #[derive(Serialize)]
        struct Sidecar<'a> {
            tool: &'static str,
            version: &'static str,
            command: &'static str,
            seed: u64,
            config_sha256: &'a str,
            config: &'a serde_json::Value,
        }
        let mut text = serde_json::to_vec_pretty(&Sidecar {
            tool: TOOL,
            version: VERSION,
            command: self.command,
            seed: self.seed,
            config_sha256: &self.digest,
            config: &self.config,
        })
        .map_err(|e| CliError::Runtime(e.to_string()))?;
        text.push(b'\n');
        Ok(text)
    }
}

/// Files produced by one run, buffered until all work has succeeded.
#[derive(Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, Vec<u8>)>,
}

impl Artifacts {
    pub fn add(&mut self, name: impl Into<String>, contents: Vec<u8>) {
        self.files.push((name.into(), contents));
    }

    /// Writes every buffered file plus a sidecar for the first one into `dir`.
    pub fn write(mut self, dir: &Path, provenance: &Provenance) -> Result<Vec<PathBuf>, CliError> {
        if let Some((first, _)) = self.files.first() {
            let name = format!("{first}.meta.json");
            self.files.push((name, provenance.sidecar()?));
        }
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))?;
        let mut written = Vec::with_capacity(self.files.len());
        for (name, contents) in self.files {
            let path = dir.join(name);
            fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?;
            written.push(path);
        }
        Ok(written)
    }
}

/// Checks an artifact name from a config: a plain file name, no directories.
pub fn check_file_name(field: &str, name: &str) -> Result<(), CliError> {
    let p = Path::new(name);
    if name.is_empty() || p.file_name().map(|f| f != p.as_os_str()).unwrap_or(true) {
        return Err(CliError::Invalid(format!("{field}: must be a plain file name, got {name:?}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_sensitive() {
        let a = Provenance::new("power", 1, &serde_json::json!({"x": 1})).unwrap();
        let b = Provenance::new("power", 1, &serde_json::json!({"x": 1})).unwrap();
        let c = Provenance::new("power", 1, &serde_json::json!({"x": 2})).unwrap();
        assert_eq!(a.digest, b.digest);
        assert_ne!(a.digest, c.digest);
        assert_eq!(a.digest.len(), 64);
        assert!(a.comment_line().starts_with("# adaptrial "));
    }

    #[test]
    fn file_names() {
        assert!(check_file_name("output", "power.csv").is_ok());
        assert!(check_file_name("output", "../x.csv").is_err());
        assert!(check_file_name("output", "a/b.csv").is_err());
        assert!(check_file_name("output", "").is_err());
    }
}
