use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, SecondsFormat, Utc};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const MANIFEST_NAME: &str = "manifest.json";

/// Record of one run: what was asked, with which inputs, and what was written.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub inputs: Value,
    pub seed: Option<u64>,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub outputs: Vec<(String, String)>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl RunManifest {
    pub fn to_json(&self) -> Value {
        let outputs: Vec<Value> = self
            .outputs
            .iter()
            .map(|(file, digest)| json!({ "file": file, "sha256": digest }))
            .collect();
        json!({
            "command": self.command,
            "argv": self.argv,
            "inputs": self.inputs,
            "toolkit_version": env!("CARGO_PKG_VERSION"),
            "seed": self.seed,
            "started": self.started.to_rfc3339_opts(SecondsFormat::Millis, true),
            "finished": self.finished.to_rfc3339_opts(SecondsFormat::Millis, true),
            "outputs": outputs,
        })
    }
}

/// Writes `files` into `dir` and returns `(name, sha256)` for each.
pub fn write_outputs(dir: &Path, files: &[(String, String)]) -> CliResult<Vec<(String, String)>> {
    fs::create_dir_all(dir)?;
    files
        .iter()
        .map(|(name, body)| {
            fs::write(dir.join(name), body)?;
            Ok((name.clone(), sha256_hex(body.as_bytes())))
        })
        .collect()
}

pub fn write_manifest(dir: &Path, m: &RunManifest) -> CliResult<PathBuf> {
    let path = dir.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(&m.to_json()).expect("manifest serializes");
    fs::write(&path, text + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }

    #[test]
    fn digests_match_written_files() {
        let dir = tempfile::tempdir().unwrap();
        let files = vec![("a.txt".to_string(), "hello\n".to_string())];
        let out = write_outputs(dir.path(), &files).unwrap();
        let on_disk = fs::read(dir.path().join("a.txt")).unwrap();
        assert_eq!(out[0].1, sha256_hex(&on_disk));
    }
}
