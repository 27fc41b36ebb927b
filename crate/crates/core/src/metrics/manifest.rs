//! Evaluation manifests: which pose and field files make up a dataset.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::eval::SequenceRecord;
use super::splits::SequenceMeta;
use crate::capture::sequence::load_poses;
use crate::error::{Error, Result};
use crate::fields::load_fields;
use crate::models::assets::write_json;
use crate::models::AssetBundle;
use crate::Real;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    #[serde(flatten)]
    pub meta: SequenceMeta,
    /// Pose file, relative to the manifest.
    pub poses: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<PathBuf>,
    /// Asset bundle for this entry; falls back to the bundle given at load time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assets: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalManifest {
    pub sequences: Vec<ManifestEntry>,
}

impl EvalManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), self)
    }

    /// Loads every entry's poses (and fields, if listed) into evaluation records.
    pub fn load_records<T: Real>(&self, manifest_path: impl AsRef<Path>, default_assets: Option<&AssetBundle<T>>) -> Result<Vec<SequenceRecord<T>>> {
        let dir = manifest_path.as_ref().parent().unwrap_or(Path::new("."));
        let mut cache: Vec<(PathBuf, AssetBundle<T>)> = Vec::new();
        let mut out = Vec::with_capacity(self.sequences.len());
        for entry in &self.sequences {
            let assets = match &entry.assets {
                Some(p) => {
                    let p = dir.join(p);
                    if !cache.iter().any(|(q, _)| *q == p) {
                        let bundle = AssetBundle::load(&p)?;
                        cache.push((p.clone(), bundle));
                    }
                    &cache.iter().find(|(q, _)| *q == p).unwrap().1
                }
                None => default_assets.ok_or_else(|| {
                    Error::Asset(format!("no asset bundle for sequence '{}'", entry.meta.sequence_id))
                })?,
            };
            let poses = load_poses(dir.join(&entry.poses))?;
            let fields = match &entry.fields {
                Some(p) => Some(load_fields(dir.join(p))?.frames),
                None => None,
            };
            out.push(SequenceRecord::from_poses(entry.meta.clone(), assets, &poses, fields)?);
        }
        Ok(out)
    }
}
