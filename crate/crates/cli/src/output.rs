use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::problem::sha256_hex;

#[derive(Serialize)]
struct OutputEntry {
    file: String,
    sha256: String,
}

/// Run metadata. The timestamps live only here, so every other JSON file
/// is byte-identical across reruns; `SOURCE_DATE_EPOCH` pins them too.
#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    arguments: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    problem_hash: Option<&'a str>,
    tool_version: &'static str,
    started_unix: u64,
    finished_unix: u64,
    outputs: Vec<OutputEntry>,
}

/// Collects output files under an optional directory.
pub struct Sink {
    dir: Option<PathBuf>,
    written: Vec<OutputEntry>,
    started: u64,
}

fn now_unix() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()) {
        return t;
    }
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl Sink {
    pub fn new(dir: Option<&Path>) -> Result<Self> {
        if let Some(d) = dir {
            std::fs::create_dir_all(d).with_context(|| format!("creating {}", d.display()))?;
        }
        Ok(Self { dir: dir.map(Path::to_path_buf), written: Vec::new(), started: now_unix() })
    }

    pub fn enabled(&self) -> bool {
        self.dir.is_some()
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        self.written.push(OutputEntry { file: name.to_string(), sha256: sha256_hex(bytes) });
        Ok(())
    }

    pub fn json<S: Serialize + ?Sized>(&mut self, name: &str, value: &S) -> Result<()> {
        if !self.enabled() {
            return Ok(());
        }
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<()> {
        self.write(name, text.as_bytes())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
        if !self.enabled() {
            return Ok(());
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        for row in rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))?;
        self.write(name, &bytes)
    }

    /// Writes `manifest.json` listing every file written so far.
    pub fn finish(self, command: &str, arguments: &str, problem_hash: Option<&str>) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let manifest = RunManifest {
            command,
            arguments,
            problem_hash,
            tool_version: env!("CARGO_PKG_VERSION"),
            started_unix: self.started,
            finished_unix: now_unix(),
            outputs: self.written,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = dir.join("manifest.json");
        std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
