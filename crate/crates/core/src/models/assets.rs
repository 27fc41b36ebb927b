//! On-disk asset formats.
//!
//! * Hand model: JSON manifest whose numeric arrays are little-endian `f64`,
//!   row-major, either inline as base64 or in a referenced raw file.
//! * Object: JSON manifest referencing two triangle-only ASCII OBJ files.
//! * Bundle: `assets.json` naming both hands, the object and per-subject shape.

use std::path::{Path, PathBuf};

use base64::Engine as _;
use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use super::hand::{HandModel, HandModelParts, NUM_JOINTS, NUM_REGRESSED, NUM_SHAPE};
use super::mesh::Mesh;
use super::object::{ArticulatedObject, Part};
use crate::error::{Error, Result};
use crate::geometry::{to_array, to_point, to_vector, vec_to_array};
use crate::Real;

pub const HAND_FORMAT: &str = "hoicap.hand/1";
pub const OBJECT_FORMAT: &str = "hoicap.object/1";
pub const BUNDLE_FORMAT: &str = "hoicap.assets/1";

/// Files written by [`AssetBundle::save`], index first.
pub const BUNDLE_FILES: [&str; 6] = [
    "assets.json",
    "hand_left.json",
    "hand_right.json",
    "object.json",
    "object_base.obj",
    "object_top.obj",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrayRef {
    pub shape: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base64: Option<String>,
    /// Raw little-endian f64 file, relative to the manifest.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HandArrays {
    pub template: ArrayRef,
    pub shape_blendshapes: ArrayRef,
    pub skinning_weights: ArrayRef,
    pub joint_regressor: ArrayRef,
    pub rest_joint_offsets: ArrayRef,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HandAssetFile {
    pub format: String,
    pub faces: Vec<[usize; 3]>,
    /// Parent joint per joint, `-1` for the root.
    pub parents: Vec<i64>,
    pub arrays: HandArrays,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LandmarkRef {
    pub part: Part,
    pub vertex: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ObjectAssetFile {
    pub format: String,
    pub base_mesh: String,
    pub top_mesh: String,
    pub axis_origin: [f64; 3],
    pub axis_direction: [f64; 3],
    pub rest_angle: f64,
    pub landmarks: Vec<LandmarkRef>,
    /// Seed vertex (index into base-then-top vertices) the landmarks were sampled from.
    #[serde(default)]
    pub fps_start: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BundleFile {
    pub format: String,
    pub left_hand: String,
    pub right_hand: String,
    pub object: String,
    pub left_beta: Vec<f64>,
    pub right_beta: Vec<f64>,
}

/// Everything the sequence solver and field extraction need.
#[derive(Debug, Clone)]
pub struct AssetBundle<T: Real> {
    pub left: HandModel<T>,
    pub right: HandModel<T>,
    pub object: ArticulatedObject<T>,
    pub left_beta: Vec<T>,
    pub right_beta: Vec<T>,
}

fn encode_f64(values: &[f64]) -> String {
    let mut bytes = Vec::with_capacity(values.len() * 8);
    for v in values {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    base64::engine::general_purpose::STANDARD.encode(bytes)
}

fn decode_bytes(bytes: &[u8], origin: &Path) -> Result<Vec<f64>> {
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::format(origin, "raw array length is not a multiple of 8"));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect())
}

impl ArrayRef {
    pub fn inline(shape: Vec<usize>, values: &[f64]) -> Self {
        Self {
            shape,
            base64: Some(encode_f64(values)),
            file: None,
        }
    }

    pub fn load(&self, manifest_dir: &Path, origin: &Path) -> Result<Vec<f64>> {
        let values = match (&self.base64, &self.file) {
            (Some(b64), None) => {
                let bytes = base64::engine::general_purpose::STANDARD
                    .decode(b64)
                    .map_err(|e| Error::format(origin, format!("bad base64: {e}")))?;
                decode_bytes(&bytes, origin)?
            }
            (None, Some(file)) => {
                let path = manifest_dir.join(file);
                let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
                decode_bytes(&bytes, &path)?
            }
            _ => {
                return Err(Error::format(
                    origin,
                    "array needs exactly one of `base64` or `file`",
                ))
            }
        };
        let expected: usize = self.shape.iter().product();
        if values.len() != expected {
            return Err(Error::format(
                origin,
                format!("array of shape {:?} holds {} values", self.shape, values.len()),
            ));
        }
        Ok(values)
    }
}

fn expect_shape(a: &ArrayRef, shape: &[usize], name: &str, origin: &Path) -> Result<()> {
    if a.shape != shape {
        return Err(Error::format(
            origin,
            format!("{name} has shape {:?}, expected {shape:?}", a.shape),
        ));
    }
    Ok(())
}

fn read_json<D: serde::de::DeserializeOwned>(path: &Path) -> Result<D> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

/// Pretty-printed JSON with a trailing newline, the layout of every file this crate writes.
pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

impl HandAssetFile {
    pub fn from_model<T: Real>(model: &HandModel<T>) -> Self {
        let p = model.parts();
        let v = model.num_vertices();
        let template: Vec<f64> = p.template.vertices.iter().flat_map(|x| to_array(x)).collect();
        let mut blend = Vec::with_capacity(v * 3 * NUM_SHAPE);
        for dirs in &p.shape_blendshapes {
            for axis in 0..3 {
                for d in dirs {
                    blend.push(d[axis].to_f64_lossy());
                }
            }
        }
        let row_major = |m: &DMatrix<T>| -> Vec<f64> {
            let mut out = Vec::with_capacity(m.len());
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    out.push(m[(r, c)].to_f64_lossy());
                }
            }
            out
        };
        let offsets: Vec<f64> = p.rest_joint_offsets.iter().flat_map(|o| vec_to_array(o)).collect();
        Self {
            format: HAND_FORMAT.into(),
            faces: p.template.faces.clone(),
            parents: p
                .parents
                .iter()
                .map(|q| q.map_or(-1, |x| x as i64))
                .collect(),
            arrays: HandArrays {
                template: ArrayRef::inline(vec![v, 3], &template),
                shape_blendshapes: ArrayRef::inline(vec![v, 3, NUM_SHAPE], &blend),
                skinning_weights: ArrayRef::inline(
                    vec![v, NUM_JOINTS],
                    &row_major(&p.skinning_weights),
                ),
                joint_regressor: ArrayRef::inline(
                    vec![NUM_REGRESSED, v],
                    &row_major(&p.joint_regressor),
                ),
                rest_joint_offsets: ArrayRef::inline(vec![NUM_JOINTS, 3], &offsets),
            },
        }
    }

    pub fn into_model<T: Real>(self, manifest_dir: &Path, origin: &Path) -> Result<HandModel<T>> {
        if self.format != HAND_FORMAT {
            return Err(Error::format(origin, format!("unknown format `{}`", self.format)));
        }
        let a = &self.arrays;
        let v = a.template.shape.first().copied().unwrap_or(0);
        expect_shape(&a.template, &[v, 3], "template", origin)?;
        expect_shape(&a.shape_blendshapes, &[v, 3, NUM_SHAPE], "shape_blendshapes", origin)?;
        expect_shape(&a.skinning_weights, &[v, NUM_JOINTS], "skinning_weights", origin)?;
        expect_shape(&a.joint_regressor, &[NUM_REGRESSED, v], "joint_regressor", origin)?;
        expect_shape(&a.rest_joint_offsets, &[NUM_JOINTS, 3], "rest_joint_offsets", origin)?;

        let template = a.template.load(manifest_dir, origin)?;
        let blend = a.shape_blendshapes.load(manifest_dir, origin)?;
        let weights = a.skinning_weights.load(manifest_dir, origin)?;
        let regressor = a.joint_regressor.load(manifest_dir, origin)?;
        let offsets = a.rest_joint_offsets.load(manifest_dir, origin)?;

        let vertices = template
            .chunks_exact(3)
            .map(|c| to_point([c[0], c[1], c[2]]))
            .collect();
        let shape_blendshapes = blend
            .chunks_exact(3 * NUM_SHAPE)
            .map(|c| {
                std::array::from_fn(|b| {
                    Vector3::new(T::lit(c[b]), T::lit(c[NUM_SHAPE + b]), T::lit(c[2 * NUM_SHAPE + b]))
                })
            })
            .collect();
        let parents = self
            .parents
            .iter()
            .map(|&p| {
                if p < 0 {
                    Ok(None)
                } else if (p as usize) < NUM_JOINTS {
                    Ok(Some(p as usize))
                } else {
                    Err(Error::format(origin, format!("parent index {p} out of range")))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let parts = HandModelParts {
            template: Mesh::new(vertices, self.faces)
                .map_err(|e| Error::format(origin, e.to_string()))?,
            shape_blendshapes,
            skinning_weights: DMatrix::from_row_iterator(
                v,
                NUM_JOINTS,
                weights.into_iter().map(T::lit),
            ),
            parents,
            rest_joint_offsets: offsets
                .chunks_exact(3)
                .map(|c| to_vector([c[0], c[1], c[2]]))
                .collect(),
            joint_regressor: DMatrix::from_row_iterator(
                NUM_REGRESSED,
                v,
                regressor.into_iter().map(T::lit),
            ),
        };
        HandModel::new(parts)
    }
}

pub fn load_hand<T: Real>(path: impl AsRef<Path>) -> Result<HandModel<T>> {
    let path = path.as_ref();
    let file: HandAssetFile = read_json(path)?;
    file.into_model(&parent_dir(path), path)
}

pub fn save_hand<T: Real>(model: &HandModel<T>, path: impl AsRef<Path>) -> Result<()> {
    write_json(path.as_ref(), &HandAssetFile::from_model(model))
}

pub fn load_object<T: Real>(path: impl AsRef<Path>) -> Result<ArticulatedObject<T>> {
    let path = path.as_ref();
    let file: ObjectAssetFile = read_json(path)?;
    if file.format != OBJECT_FORMAT {
        return Err(Error::format(path, format!("unknown format `{}`", file.format)));
    }
    let dir = parent_dir(path);
    let base = Mesh::<f64>::read_obj(dir.join(&file.base_mesh))?.cast();
    let top = Mesh::<f64>::read_obj(dir.join(&file.top_mesh))?.cast();
    ArticulatedObject::new(
        base,
        top,
        to_point(file.axis_origin),
        to_vector(file.axis_direction),
        T::lit(file.rest_angle),
        file.landmarks.iter().map(|l| (l.part, l.vertex)).collect(),
    )
    .map_err(|e| Error::format(path, e.to_string()))
}

/// Writes `<stem>.json`, `<stem>_base.obj` and `<stem>_top.obj` into `dir`.
pub fn save_object<T: Real>(
    object: &ArticulatedObject<T>,
    dir: impl AsRef<Path>,
    stem: &str,
    fps_start: usize,
) -> Result<PathBuf> {
    let dir = dir.as_ref();
    let base_name = format!("{stem}_base.obj");
    let top_name = format!("{stem}_top.obj");
    object.base.write_obj(dir.join(&base_name))?;
    object.top.write_obj(dir.join(&top_name))?;
    let file = ObjectAssetFile {
        format: OBJECT_FORMAT.into(),
        base_mesh: base_name,
        top_mesh: top_name,
        axis_origin: to_array(&object.axis_origin),
        axis_direction: vec_to_array(&object.axis_direction),
        rest_angle: object.rest_angle.to_f64_lossy(),
        landmarks: object
            .landmarks
            .iter()
            .map(|&(part, vertex)| LandmarkRef { part, vertex })
            .collect(),
        fps_start,
    };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &file)?;
    Ok(path)
}

impl<T: Real> AssetBundle<T> {
    /// Loads `assets.json` from `dir` (or the file itself if `path` is a file).
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let index = if path.is_dir() {
            path.join("assets.json")
        } else {
            path.to_path_buf()
        };
        let file: BundleFile = read_json(&index)?;
        if file.format != BUNDLE_FORMAT {
            return Err(Error::format(&index, format!("unknown format `{}`", file.format)));
        }
        let dir = parent_dir(&index);
        let beta = |b: &[f64]| -> Result<Vec<T>> {
            if b.len() != NUM_SHAPE {
                return Err(Error::format(&index, "subject shape needs 10 coefficients"));
            }
            Ok(b.iter().map(|&x| T::lit(x)).collect())
        };
        Ok(Self {
            left: load_hand(dir.join(&file.left_hand))?,
            right: load_hand(dir.join(&file.right_hand))?,
            object: load_object(dir.join(&file.object))?,
            left_beta: beta(&file.left_beta)?,
            right_beta: beta(&file.right_beta)?,
        })
    }

    /// Writes the bundle index plus all referenced files into `dir`.
    pub fn save(&self, dir: impl AsRef<Path>, fps_start: usize) -> Result<PathBuf> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        save_hand(&self.left, dir.join("hand_left.json"))?;
        save_hand(&self.right, dir.join("hand_right.json"))?;
        save_object(&self.object, dir, "object", fps_start)?;
        let file = BundleFile {
            format: BUNDLE_FORMAT.into(),
            left_hand: "hand_left.json".into(),
            right_hand: "hand_right.json".into(),
            object: "object.json".into(),
            left_beta: self.left_beta.iter().map(|b| b.to_f64_lossy()).collect(),
            right_beta: self.right_beta.iter().map(|b| b.to_f64_lossy()).collect(),
        };
        let index = dir.join("assets.json");
        write_json(&index, &file)?;
        Ok(index)
    }
}
