use std::path::Path;

use anyhow::{Context, Result};
use radial_plap::{presets, ProblemSpecF64};
use sha2::{Digest, Sha256};

use crate::{ProblemArg, UsageError};

/// A loaded problem with its canonical JSON and digest.
pub struct Loaded {
    pub spec: ProblemSpecF64,
    pub label: String,
    pub canonical: String,
}

impl Loaded {
    pub fn hash(&self) -> String {
        sha256_hex(self.canonical.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load(arg: &ProblemArg) -> Result<Loaded> {
    match (&arg.problem, &arg.preset) {
        (Some(path), _) => from_file(path),
        (None, Some(name)) => from_preset(name),
        (None, None) => Err(UsageError("either --problem or --preset is required".into()).into()),
    }
}

pub fn from_preset(name: &str) -> Result<Loaded> {
    let spec = presets::by_name::<f64>(name).ok_or_else(|| {
        UsageError(format!("unknown preset `{name}`; known presets: {}", presets::NAMES.join(", ")))
    })?;
    let canonical = spec.to_json();
    Ok(Loaded { spec, label: name.to_string(), canonical })
}

fn from_file(path: &Path) -> Result<Loaded> {
    let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
    let spec = ProblemSpecF64::from_json(&text).with_context(|| format!("in {}", path.display()))?;
    let canonical = spec.to_json();
    Ok(Loaded { spec, label: path.display().to_string(), canonical })
}
