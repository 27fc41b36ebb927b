//! Interaction fields, contact labels and contact heatmaps.

pub mod field;
pub mod heatmap;
pub mod io;
mod kdtree;
pub mod sequence;

pub use field::{
    extract_gt_fields, field_bruteforce, field_fast, field_with_metric, DistanceMetric, Entity, FieldSet,
    InteractionField, DEFAULT_D_MAX,
};
pub use heatmap::{aggregate_heatmap, contact_labels, ContactHeatmap, DEFAULT_CONTACT_THRESHOLD};
pub use io::{load_fields, save_fields, SequenceFields};
pub use kdtree::KdTree;
pub use sequence::{frame_contacts, frame_fields, heatmap_meshes, heatmaps_from_contacts, sequence_fields, sequence_heatmaps};
