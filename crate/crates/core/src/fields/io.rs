//! Field dumps: a JSON index with inline values, or one raw `f32` file per field.
//!
//! A raw file starts with a single JSON header line
//! `{"source", "target", "count", "d_max", "frames"}` followed by
//! `frames * count` little-endian `f32` values, frame-major.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::field::{Entity, FieldSet, InteractionField};
use crate::error::{Error, Result};
use crate::models::assets::write_json;
use crate::Real;

pub const FIELDS_FORMAT: &str = "hoicap.fields/1";

/// The four fields of every frame of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFields<T: Real> {
    pub d_max: T,
    pub frames: Vec<FieldSet<T>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RawHeader {
    pub source: Entity,
    pub target: Entity,
    pub count: usize,
    pub d_max: f64,
    pub frames: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FieldRecord {
    source: Entity,
    target: Entity,
    count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distances: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct FieldsFile {
    format: String,
    d_max: f64,
    frames: usize,
    fields: Vec<FieldRecord>,
}

const ORDER: [(Entity, Entity); 4] = [
    (Entity::LeftHand, Entity::Object),
    (Entity::RightHand, Entity::Object),
    (Entity::Object, Entity::LeftHand),
    (Entity::Object, Entity::RightHand),
];

fn field_at<T: Real>(set: &FieldSet<T>, k: usize) -> &InteractionField<T> {
    set.fields()[k]
}

/// Writes `path` (JSON). With `binary`, values go to sibling `<stem>.<name>.f32` files.
pub fn save_fields<T: Real>(fields: &SequenceFields<T>, path: impl AsRef<Path>, binary: bool) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or(Path::new("."));
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("fields");
    let mut written = vec![path.to_path_buf()];
    let mut records = Vec::with_capacity(4);
    for (k, &(source, target)) in ORDER.iter().enumerate() {
        let count = fields.frames.first().map_or(0, |f| field_at(f, k).len());
        let mut record = FieldRecord {
            source,
            target,
            count,
            distances: None,
            file: None,
        };
        if binary {
            let name = format!("{stem}.{}2{}.f32", source.short(), target.short());
            let header = RawHeader {
                source,
                target,
                count,
                d_max: fields.d_max.to_f64_lossy(),
                frames: fields.frames.len(),
            };
            let mut buf = serde_json::to_vec(&header)?;
            buf.push(b'\n');
            for f in &fields.frames {
                for &d in &field_at(f, k).distances {
                    buf.extend_from_slice(&(d.to_f64_lossy() as f32).to_le_bytes());
                }
            }
            let file = dir.join(&name);
            std::fs::File::create(&file)
                .and_then(|mut w| w.write_all(&buf))
                .map_err(|e| Error::io(&file, e))?;
            written.push(file);
            record.file = Some(name);
        } else {
            record.distances = Some(
                fields
                    .frames
                    .iter()
                    .map(|f| field_at(f, k).distances.iter().map(|d| d.to_f64_lossy()).collect())
                    .collect(),
            );
        }
        records.push(record);
    }
    let file = FieldsFile {
        format: FIELDS_FORMAT.into(),
        d_max: fields.d_max.to_f64_lossy(),
        frames: fields.frames.len(),
        fields: records,
    };
    write_json(path, &file)?;
    Ok(written)
}

/// Reads one raw field file: header plus per-frame values.
pub fn read_raw_field(path: impl AsRef<Path>) -> Result<(RawHeader, Vec<Vec<f32>>)> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    reader.read_line(&mut line).map_err(|e| Error::io(path, e))?;
    let header: RawHeader = serde_json::from_str(line.trim_end()).map_err(|e| Error::format(path, format!("header: {e}")))?;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    let expected = header.count * header.frames * 4;
    if bytes.len() != expected {
        return Err(Error::format(path, format!("expected {expected} payload bytes, found {}", bytes.len())));
    }
    let values: Vec<f32> = bytes.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
    let frames = if header.count == 0 {
        vec![Vec::new(); header.frames]
    } else {
        values.chunks(header.count).map(|c| c.to_vec()).collect()
    };
    Ok((header, frames))
}

pub fn load_fields<T: Real>(path: impl AsRef<Path>) -> Result<SequenceFields<T>> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or(Path::new("."));
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: FieldsFile = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    if file.format != FIELDS_FORMAT {
        return Err(Error::format(path, format!("unknown format '{}'", file.format)));
    }
    let d_max = T::lit(file.d_max);
    let mut per_field: Vec<Vec<Vec<T>>> = Vec::with_capacity(4);
    for &(source, target) in &ORDER {
        let record = file
            .fields
            .iter()
            .find(|r| r.source == source && r.target == target)
            .ok_or_else(|| Error::format(path, format!("missing field {}2{}", source.short(), target.short())))?;
        let frames: Vec<Vec<T>> = match (&record.distances, &record.file) {
            (Some(d), _) => d.iter().map(|f| f.iter().map(|&v| T::lit(v)).collect()).collect(),
            (None, Some(name)) => {
                let (header, frames) = read_raw_field(dir.join(name))?;
                if header.source != source || header.target != target {
                    return Err(Error::format(path, format!("raw file {name} holds a different field")));
                }
                frames.iter().map(|f| f.iter().map(|&v| T::lit(f64::from(v)).min(d_max)).collect()).collect()
            }
            (None, None) => return Err(Error::format(path, "field record has neither distances nor file")),
        };
        if frames.len() != file.frames || frames.iter().any(|f| f.len() != record.count) {
            return Err(Error::format(path, format!("field {}2{} has inconsistent sizes", source.short(), target.short())));
        }
        per_field.push(frames);
    }
    let mut frames = Vec::with_capacity(file.frames);
    #[allow(clippy::needless_range_loop)]
    for f in 0..file.frames {
        let mut take = |k: usize| {
            let (s, t) = ORDER[k];
            InteractionField::new(s, t, d_max, std::mem::take(&mut per_field[k][f])).map_err(|e| Error::format(path, e.to_string()))
        };
        frames.push(FieldSet {
            left_to_object: take(0)?,
            right_to_object: take(1)?,
            object_to_left: take(2)?,
            object_to_right: take(3)?,
        });
    }
    Ok(SequenceFields { d_max, frames })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::extract_gt_fields;
    use crate::models::Mesh;
    use nalgebra::Point3;
    use rand::{Rng, SeedableRng};

    fn sample() -> SequenceFields<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut mesh = |n: usize| {
            Mesh::from_points((0..n).map(|_| Point3::new(rng.random_range(0.0..0.1), rng.random_range(0.0..0.1), 0.0)).collect()).unwrap()
        };
        let (l, r, o) = (mesh(5), mesh(6), mesh(7));
        let set = extract_gt_fields(&l, &r, &o, 0.1).unwrap();
        SequenceFields {
            d_max: 0.1,
            frames: vec![set.clone(), set],
        }
    }

    #[test]
    fn json_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fields.json");
        let s = sample();
        save_fields(&s, &path, false).unwrap();
        assert_eq!(load_fields::<f64>(&path).unwrap(), s);
    }

    #[test]
    fn binary_round_trip_within_f32() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fields.json");
        let s = sample();
        let written = save_fields(&s, &path, true).unwrap();
        assert_eq!(written.len(), 5);
        let (header, frames) = read_raw_field(dir.path().join("fields.l2o.f32")).unwrap();
        assert_eq!((header.count, header.frames), (5, 2));
        assert_eq!(frames.len(), 2);
        let back = load_fields::<f64>(&path).unwrap();
        for (a, b) in back.frames.iter().zip(&s.frames) {
            for (fa, fb) in a.fields().iter().zip(b.fields()) {
                for (x, y) in fa.distances.iter().zip(&fb.distances) {
                    assert!((x - y).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn truncated_raw_file_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fields.json");
        save_fields(&sample(), &path, true).unwrap();
        let raw = dir.path().join("fields.o2r.f32");
        let mut bytes = std::fs::read(&raw).unwrap();
        bytes.pop();
        std::fs::write(&raw, bytes).unwrap();
        assert!(matches!(load_fields::<f64>(&path), Err(Error::Format { .. })));
    }
}
