//! Hand-object interaction capture toolkit.
//!
//! Parametric hand and single-hinge object models, marker-based pose
//! solving, nearest-vertex interaction fields, contact heatmaps, the
//! evaluation metrics (MPJPE, MRRPE, AAE, V2V, PCD) and a synthetic
//! ground-truth generator. Numeric code is generic over [`Real`]
//! (`f32` or `f64`); the aliases below fix the scalar for convenience.

// Guards are written `!(x > 0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capture;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod losses;
pub mod metrics;
pub mod models;
mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Real;

/// Toolkit version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Versioned file formats this build reads and writes.
pub const FORMATS: [&str; 5] = [
    models::assets::HAND_FORMAT,
    models::assets::OBJECT_FORMAT,
    models::assets::BUNDLE_FORMAT,
    capture::markers::MARKERS_FORMAT,
    fields::io::FIELDS_FORMAT,
];

pub type Mesh64 = models::Mesh<f64>;
pub type Mesh32 = models::Mesh<f32>;
pub type HandModel64 = models::HandModel<f64>;
pub type HandModel32 = models::HandModel<f32>;
pub type HandParams64 = models::HandParams<f64>;
pub type HandParams32 = models::HandParams<f32>;
pub type ArticulatedObject64 = models::ArticulatedObject<f64>;
pub type ArticulatedObject32 = models::ArticulatedObject<f32>;
pub type ObjectPose64 = models::ObjectPose<f64>;
pub type ObjectPose32 = models::ObjectPose<f32>;
pub type CameraParams64 = models::CameraParams<f64>;
pub type CameraParams32 = models::CameraParams<f32>;
pub type AssetBundle64 = models::AssetBundle<f64>;
pub type AssetBundle32 = models::AssetBundle<f32>;
pub type MarkerSequence64 = capture::MarkerSequence<f64>;
pub type MarkerSequence32 = capture::MarkerSequence<f32>;
pub type FramePose64 = capture::FramePose<f64>;
pub type FramePose32 = capture::FramePose<f32>;
pub type InteractionField64 = fields::InteractionField<f64>;
pub type InteractionField32 = fields::InteractionField<f32>;
pub type FieldSet64 = fields::FieldSet<f64>;
pub type FieldSet32 = fields::FieldSet<f32>;
