//! Result persistence. Every file carries the configuration hash and an
//! existing file is only replaced by byte-identical content.

use crate::error::CliError;
use serde::Serialize;
use std::path::{Path, PathBuf};

/// Version of the JSON documents written by the CLI.
pub const OUTPUT_VERSION: u32 = 1;

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    output_version: u32,
    kind: &'a str,
    config_hash: &'a str,
    #[serde(flatten)]
    body: &'a T,
}

pub struct OutputDir {
    root: PathBuf,
    config_hash: String,
    written: Vec<PathBuf>,
}

impl OutputDir {
    pub fn create(root: &Path, config_hash: &str) -> Result<Self, CliError> {
        std::fs::create_dir_all(root).map_err(|e| CliError::Io(root.display().to_string(), e))?;
        Ok(Self { root: root.to_path_buf(), config_hash: config_hash.to_string(), written: Vec::new() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    /// Checks every target first so that a refused run leaves no partial output.
    pub fn ensure_writable(&self, names: &[&str], contents: &[&[u8]]) -> Result<(), CliError> {
        for (name, bytes) in names.iter().zip(contents) {
            let path = self.path(name);
            if let Ok(existing) = std::fs::read(&path) {
                if existing != *bytes {
                    return Err(CliError::Overwrite(path.display().to_string()));
                }
            }
        }
        Ok(())
    }

    pub fn json<T: Serialize>(&self, kind: &str, body: &T) -> Vec<u8> {
        let envelope = Envelope { output_version: OUTPUT_VERSION, kind, config_hash: &self.config_hash, body };
        let mut text = serde_json::to_string_pretty(&envelope).expect("results serialise");
        text.push('\n');
        text.into_bytes()
    }

    /// Prefixes CSV content with a `# config_hash=` comment line.
    pub fn csv(&self, body: Vec<u8>) -> Vec<u8> {
        let mut out = format!("# config_hash={}\n", self.config_hash).into_bytes();
        out.extend(body);
        out
    }

    pub fn write_all(&mut self, files: Vec<(String, Vec<u8>)>) -> Result<(), CliError> {
        let names: Vec<&str> = files.iter().map(|(n, _)| n.as_str()).collect();
        let contents: Vec<&[u8]> = files.iter().map(|(_, c)| c.as_slice()).collect();
        self.ensure_writable(&names, &contents)?;
        for (name, bytes) in files {
            let path = self.path(&name);
            std::fs::write(&path, bytes).map_err(|e| CliError::Io(path.display().to_string(), e))?;
            self.written.push(path);
        }
        Ok(())
    }
}
