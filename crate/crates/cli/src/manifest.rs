use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::args::Format;

/// Record written next to every output; `argv` replays the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub params: serde_json::Value,
    pub format: Format,
    pub seed: Option<u64>,
    pub version: String,
    pub argv: Vec<String>,
    pub outputs: Vec<String>,
    pub passed: bool,
    pub wall_time_secs: f64,
}

/// The part of a manifest that determines the output bytes.
#[derive(Serialize)]
struct Identity<'a> {
    command: &'a str,
    params: &'a serde_json::Value,
    format: Format,
    seed: Option<u64>,
    version: &'a str,
}

impl RunManifest {
    /// Hex digest of the output-determining fields.
    pub fn digest(&self) -> String {
        let id = Identity {
            command: &self.command,
            params: &self.params,
            format: self.format,
            seed: self.seed,
            version: &self.version,
        };
        let bytes = serde_json::to_vec(&id).expect("manifest identity serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn stem(&self) -> String {
        format!("{}-{}", self.command, &self.digest()[..16])
    }

    /// Writes `body` and the manifest into `dir`; returns the output path.
    pub fn write(&mut self, dir: &Path, body: &str) -> std::io::Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let stem = self.stem();
        let name = format!("{stem}.{}", self.format.extension());
        let path = dir.join(&name);
        fs::write(&path, body)?;
        self.outputs = vec![name];
        let json = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(dir.join(format!("{stem}.manifest.json")), json + "\n")?;
        Ok(path)
    }
}
