//! Parametric hand and articulated object models, camera conversion and landmark selection.

pub mod assets;
pub mod camera;
pub mod fps;
pub mod hand;
pub mod mesh;
pub mod object;

pub use camera::{project, weak_to_perspective, CameraParams};
pub use fps::{fps_landmarks, fps_points};
pub use hand::{HandModel, HandModelParts, HandParams, PosedSkeleton};
pub use assets::AssetBundle;
pub use mesh::Mesh;
pub use object::{ArticulatedObject, ObjectPose, Part};
