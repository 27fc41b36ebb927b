//! Synthetic assets and sequences with known ground truth.

pub mod config;
pub mod hand;
pub mod objects;
pub mod sequence;
pub mod trajectory;

pub use config::{ArticulationProfile, MarkerLayout, MotionAmplitudes, SynthConfig};
pub use hand::{dorsal_marker_vertices, mitten_hand};
pub use objects::{generate_object_asset, object_marker_vertices, subdivided_box, ObjectKind};
pub use sequence::{generate_assets, generate_sequence, SyntheticSequence};
pub use trajectory::{random_walk, MonotoneCubic};
