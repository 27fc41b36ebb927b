//! Fields and contact heatmaps over posed sequences.

use super::field::{extract_gt_fields, Entity, FieldSet};
use super::heatmap::{aggregate_heatmap, contact_labels, ContactHeatmap};
use super::io::SequenceFields;
use crate::capture::FramePose;
use crate::error::{Error, Result};
use crate::models::{AssetBundle, Mesh};
use crate::Real;

/// The four fields of one frame, with the object's parts combined into one mesh (base first).
pub fn frame_fields<T: Real>(assets: &AssetBundle<T>, pose: &FramePose<T>, d_max: T) -> Result<FieldSet<T>> {
    let left = assets.left.pose(&pose.left)?;
    let right = assets.right.pose(&pose.right)?;
    let object = assets.object.pose_combined(&pose.object)?;
    extract_gt_fields(&left, &right, &object, d_max)
}

pub fn sequence_fields<T: Real>(assets: &AssetBundle<T>, poses: &[FramePose<T>], d_max: T) -> Result<SequenceFields<T>> {
    Ok(SequenceFields {
        d_max,
        frames: poses.iter().map(|p| frame_fields(assets, p, d_max)).collect::<Result<_>>()?,
    })
}

/// Per-frame contact labels for the left hand, right hand and object. An
/// object vertex is in contact when either hand is within the threshold.
pub fn frame_contacts<T: Real>(fields: &FieldSet<T>, threshold: T) -> Result<[Vec<bool>; 3]> {
    let left = contact_labels(&fields.left_to_object, threshold)?;
    let right = contact_labels(&fields.right_to_object, threshold)?;
    let by_left = contact_labels(&fields.object_to_left, threshold)?;
    let by_right = contact_labels(&fields.object_to_right, threshold)?;
    let object = by_left.iter().zip(&by_right).map(|(a, b)| *a || *b).collect();
    Ok([left, right, object])
}

/// Left hand, right hand and object heatmaps from per-frame contact labels.
pub fn heatmaps_from_contacts(frames: &[[Vec<bool>; 3]]) -> Result<[ContactHeatmap; 3]> {
    if frames.is_empty() {
        return Err(Error::EmptyFrames);
    }
    let pick = |k: usize| frames.iter().map(|f| f[k].clone()).collect::<Vec<_>>();
    Ok([
        aggregate_heatmap(Entity::LeftHand, &pick(0))?,
        aggregate_heatmap(Entity::RightHand, &pick(1))?,
        aggregate_heatmap(Entity::Object, &pick(2))?,
    ])
}

pub fn sequence_heatmaps<T: Real>(assets: &AssetBundle<T>, poses: &[FramePose<T>], threshold: T, d_max: T) -> Result<[ContactHeatmap; 3]> {
    let contacts = poses
        .iter()
        .map(|p| frame_contacts(&frame_fields(assets, p, d_max)?, threshold))
        .collect::<Result<Vec<_>>>()?;
    heatmaps_from_contacts(&contacts)
}

/// Canonical meshes matching heatmap vertex order: left, right, object (base then top).
pub fn heatmap_meshes<T: Real>(assets: &AssetBundle<T>) -> [Mesh<T>; 3] {
    [
        assets.left.template().clone(),
        assets.right.template().clone(),
        Mesh::concat(&[&assets.object.base, &assets.object.top]),
    ]
}
