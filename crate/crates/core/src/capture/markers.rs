//! Marker observations, fixed marker-to-vertex correspondences and the
//! marker-sequence file format.

use std::path::Path;

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{to_array, to_point};
use crate::models::assets::write_json;
use crate::models::AssetBundle;
use crate::Real;

pub const MARKERS_FORMAT: &str = "hoicap.markers/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarkerEntity {
    LeftHand,
    RightHand,
    ObjectBase,
    ObjectTop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerCorrespondence {
    pub marker_id: String,
    pub entity: MarkerEntity,
    pub vertex_index: usize,
}

/// Observed marker positions at one instant, aligned with the sequence's
/// correspondence list. `None` marks an occluded marker.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerFrame<T: Real> {
    pub time: T,
    pub positions: Vec<Option<Point3<T>>>,
}

impl<T: Real> MarkerFrame<T> {
    pub fn visible_count(&self) -> usize {
        self.positions.iter().filter(|p| p.is_some()).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarkerSequence<T: Real> {
    pub fps: f64,
    pub correspondences: Vec<MarkerCorrespondence>,
    pub frames: Vec<MarkerFrame<T>>,
}

impl<T: Real> MarkerSequence<T> {
    pub fn new(fps: f64, correspondences: Vec<MarkerCorrespondence>, frames: Vec<MarkerFrame<T>>) -> Result<Self> {
        let seq = Self {
            fps,
            correspondences,
            frames,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.correspondences.len();
        let mut ids: Vec<&str> = self.correspondences.iter().map(|c| c.marker_id.as_str()).collect();
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Parameter("duplicate marker id".into()));
        }
        for (i, f) in self.frames.iter().enumerate() {
            if f.positions.len() != n {
                return Err(Error::RaggedFrames {
                    frame: i,
                    expected: n,
                    got: f.positions.len(),
                });
            }
            if f.positions.iter().flatten().any(|p| !p.coords.iter().all(|c| c.is_finite())) {
                return Err(Error::Parameter(format!("frame {i} has a non-finite marker")));
            }
        }
        Ok(())
    }

    /// Checks that every correspondence references an existing vertex.
    pub fn check_against(&self, assets: &AssetBundle<T>) -> Result<()> {
        for c in &self.correspondences {
            let count = match c.entity {
                MarkerEntity::LeftHand => assets.left.num_vertices(),
                MarkerEntity::RightHand => assets.right.num_vertices(),
                MarkerEntity::ObjectBase => assets.object.base.len(),
                MarkerEntity::ObjectTop => assets.object.top.len(),
            };
            if c.vertex_index >= count {
                return Err(Error::Parameter(format!(
                    "marker {} references vertex {} of a {}-vertex mesh",
                    c.marker_id, c.vertex_index, count
                )));
            }
        }
        Ok(())
    }

    /// Visible `(vertex, position)` pairs of `entity` in `frame`.
    pub fn observations(&self, frame: usize, entity: MarkerEntity) -> Vec<(usize, Point3<T>)> {
        self.correspondences
            .iter()
            .zip(&self.frames[frame].positions)
            .filter(|(c, _)| c.entity == entity)
            .filter_map(|(c, p)| p.map(|p| (c.vertex_index, p)))
            .collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkerHeader {
    pub format: String,
    pub units: String,
    pub fps: f64,
    pub marker_ids: Vec<String>,
    pub correspondences: Vec<MarkerCorrespondence>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkerFrameRecord {
    pub time: f64,
    pub positions: Vec<Option<[f64; 3]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarkerFile {
    pub header: MarkerHeader,
    pub frames: Vec<MarkerFrameRecord>,
}

impl MarkerFile {
    pub fn from_sequence<T: Real>(seq: &MarkerSequence<T>) -> Self {
        Self {
            header: MarkerHeader {
                format: MARKERS_FORMAT.into(),
                units: "m".into(),
                fps: seq.fps,
                marker_ids: seq.correspondences.iter().map(|c| c.marker_id.clone()).collect(),
                correspondences: seq.correspondences.clone(),
            },
            frames: seq
                .frames
                .iter()
                .map(|f| MarkerFrameRecord {
                    time: f.time.to_f64_lossy(),
                    positions: f.positions.iter().map(|p| p.as_ref().map(to_array)).collect(),
                })
                .collect(),
        }
    }

    /// Reorders correspondences to follow `marker_ids` and converts units.
    pub fn into_sequence<T: Real>(self, origin: &Path) -> Result<MarkerSequence<T>> {
        let h = self.header;
        if h.format != MARKERS_FORMAT {
            return Err(Error::format(origin, format!("unknown format `{}`", h.format)));
        }
        let scale = match h.units.as_str() {
            "m" => 1.0,
            "mm" => 1e-3,
            "cm" => 1e-2,
            other => return Err(Error::format(origin, format!("unknown units `{other}`"))),
        };
        let correspondences = h
            .marker_ids
            .iter()
            .map(|id| {
                h.correspondences
                    .iter()
                    .find(|c| &c.marker_id == id)
                    .cloned()
                    .ok_or_else(|| Error::format(origin, format!("marker `{id}` has no correspondence")))
            })
            .collect::<Result<Vec<_>>>()?;
        if h.correspondences.len() != h.marker_ids.len() {
            return Err(Error::format(origin, "correspondences do not match marker ids"));
        }
        let frames = self
            .frames
            .into_iter()
            .map(|f| MarkerFrame {
                time: T::lit(f.time),
                positions: f
                    .positions
                    .into_iter()
                    .map(|p| p.map(|p| to_point([p[0] * scale, p[1] * scale, p[2] * scale])))
                    .collect(),
            })
            .collect();
        MarkerSequence::new(h.fps, correspondences, frames).map_err(|e| Error::format(origin, e.to_string()))
    }
}

pub fn load_markers<T: Real>(path: impl AsRef<Path>) -> Result<MarkerSequence<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: MarkerFile = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    file.into_sequence(path)
}

pub fn save_markers<T: Real>(seq: &MarkerSequence<T>, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), &MarkerFile::from_sequence(seq))
}
