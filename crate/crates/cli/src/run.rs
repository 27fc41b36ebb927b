//! Run manifests and the overwrite guard.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::Failure;

/// Provenance record written next to every command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub formats: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub inputs: Vec<String>,
    /// Relative to the manifest's directory when possible.
    pub outputs: Vec<String>,
    pub overrides: BTreeMap<String, serde_json::Value>,
    #[serde(skip)]
    location: PathBuf,
    #[serde(skip)]
    output_paths: Vec<PathBuf>,
}

impl RunManifest {
    pub fn new(command: &str, location: PathBuf) -> Self {
        Self {
            command: command.into(),
            version: hoicap::VERSION.into(),
            formats: hoicap::FORMATS.iter().map(|s| s.to_string()).collect(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            overrides: BTreeMap::new(),
            location,
            output_paths: Vec::new(),
        }
    }

    /// Manifest path for a single output file: `poses.json` gets `poses.run.json`.
    pub fn beside(out: &Path) -> PathBuf {
        let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
        out.with_file_name(format!("{stem}.run.json"))
    }

    pub fn input(&mut self, path: &Path) {
        self.inputs.push(path.display().to_string());
    }

    pub fn output(&mut self, path: PathBuf) {
        let dir = self.location.parent().unwrap_or(Path::new(""));
        let shown = path.strip_prefix(dir).unwrap_or(&path).display().to_string();
        self.outputs.push(shown);
        self.output_paths.push(path);
    }

    pub fn set(&mut self, key: &str, value: impl Serialize) {
        self.overrides
            .insert(key.into(), serde_json::to_value(value).expect("override serializes"));
    }

    /// Refuses to run when any declared output exists, unless forced.
    pub fn guard(&self, force: bool) -> Result<(), Failure> {
        if force {
            return Ok(());
        }
        let existing: Vec<String> = self
            .output_paths
            .iter()
            .chain(std::iter::once(&self.location))
            .filter(|p| p.exists())
            .map(|p| p.display().to_string())
            .collect();
        if existing.is_empty() {
            Ok(())
        } else {
            Err(Failure::Usage(format!(
                "refusing to overwrite {} (pass --force to overwrite)",
                existing.join(", ")
            )))
        }
    }

    pub fn write(&self) -> Result<(), Failure> {
        hoicap::models::assets::write_json(&self.location, self)?;
        Ok(())
    }
}
