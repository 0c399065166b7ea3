//! Output directory session: deterministic file emission, checksums,
//! and the run manifest. On failure every file written so far is
//! removed so no partial outputs survive.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// Formats a float for CSV payloads: fixed scientific notation, locale
/// independent, enough digits to round-trip visibly distinct values.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

#[derive(Debug, Serialize)]
pub struct ManifestFile {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// The machine-readable record of one run.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub toolkit_version: String,
    pub config: RunConfig,
    /// Wall-clock duration; the only field allowed to differ between
    /// identical runs.
    pub duration_seconds: f64,
    pub files: Vec<ManifestFile>,
}

pub struct OutputSession {
    dir: PathBuf,
    files: Vec<ManifestFile>,
    started: Instant,
}

impl OutputSession {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
            started: Instant::now(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Write one payload file and record its checksum.
    pub fn write_file(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        let mut f = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        f.write_all(contents.as_bytes())
            .map_err(|e| CliError::io(&path, e))?;
        let mut hasher = Sha256::new();
        hasher.update(contents.as_bytes());
        self.files.push(ManifestFile {
            path: name.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
            bytes: contents.len() as u64,
        });
        Ok(())
    }

    /// Write a CSV payload from a header and row-builder.
    pub fn write_csv(&mut self, name: &str, header: &str, rows: &[Vec<String>]) -> Result<()> {
        let mut out = String::with_capacity(rows.len() * 32 + header.len() + 1);
        out.push_str(header);
        out.push('\n');
        for row in rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        self.write_file(name, &out)
    }

    /// Serialize a JSON payload file.
    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let text =
            serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
        self.write_file(name, &text)
    }

    /// Remove everything written so far (failure path).
    pub fn discard(self) {
        for f in &self.files {
            let _ = fs::remove_file(self.dir.join(&f.path));
        }
    }

    /// Finish the run: write `manifest.json` listing every payload file.
    pub fn finish(self, config: &RunConfig) -> Result<RunManifest> {
        let manifest = RunManifest {
            toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
            config: config.clone(),
            duration_seconds: self.started.elapsed().as_secs_f64(),
            files: self.files,
        };
        let text =
            serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Config(e.to_string()))?;
        let path = self.dir.join("manifest.json");
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(manifest)
    }
}
