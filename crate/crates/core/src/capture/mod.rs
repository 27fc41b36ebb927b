//! Marker-based solvers: rigid part poses, hinge calibration, articulation,
//! hand fitting and whole-sequence solving.

pub mod articulation;
pub mod axis;
pub mod hand_fit;
pub mod lm;
pub mod markers;
pub mod rigid;
pub mod sequence;

pub use articulation::{articulation_objective, solve_articulation};
pub use axis::{estimate_axis, AxisEstimate};
pub use hand_fit::{calibrate_shape, fit_hand, rigid_initialization, HandFit, ShapeCalibration};
pub use lm::{levenberg_marquardt, LeastSquaresProblem, LmReport, SolverSettings};
pub use markers::{MarkerCorrespondence, MarkerEntity, MarkerFrame, MarkerSequence};
pub use rigid::{solve_rigid, RigidFit};
pub use sequence::{solve_sequence, FrameFlags, FramePose};
