//! Evaluation metrics, protocol splits and reports.

pub mod basic;
pub mod eval;
pub mod manifest;
pub mod splits;

pub use basic::{aae, default_alphas, mean_aae, mpjpe, mrrpe, pcd, v2v};
pub use eval::{evaluate_split, frame_metrics, EvalReport, FrameGeometry, MetricRow, PcdPoint, SequenceRecord, FIELD_NAMES};
pub use manifest::{EvalManifest, ManifestEntry};
pub use splits::{split, Protocol, SequenceMeta, Split, SplitRole, EGOCENTRIC_VIEW};
