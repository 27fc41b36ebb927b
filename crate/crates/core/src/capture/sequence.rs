//! Per-frame solving of a marker sequence into hand and object poses.

use std::path::Path;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::articulation::solve_articulation;
use super::hand_fit::{fit_hand, rigid_initialization, MIN_HAND_MARKERS};
use super::lm::SolverSettings;
use super::markers::{MarkerEntity, MarkerSequence};
use super::rigid::solve_rigid;
use crate::error::{Error, Result};
use crate::models::{AssetBundle, HandModel, HandParams, ObjectPose};
use crate::models::assets::write_json;
use crate::Real;

/// Fewest visible markers per object part.
pub const MIN_PART_MARKERS: usize = 3;
/// A warm-started hand fit worse than this (RMS, meters) is retried from a rigid initialization.
const REINIT_RMS: f64 = 2e-3;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameFlags {
    /// Too few markers; parameters interpolated from neighboring frames.
    pub left_gap: bool,
    pub right_gap: bool,
    pub object_gap: bool,
    /// The solver hit its iteration cap; best iterate kept.
    pub left_unconverged: bool,
    pub right_unconverged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FramePose<T: Real> {
    pub left: HandParams<T>,
    pub right: HandParams<T>,
    pub object: ObjectPose<T>,
    pub flags: FrameFlags,
}

struct HandTrack<'a, T: Real> {
    model: &'a HandModel<T>,
    beta: &'a [T],
    entity: MarkerEntity,
    last: Option<HandParams<T>>,
}

impl<T: Real> HandTrack<'_, T> {
    /// `None` when the frame has too few markers.
    fn solve(&mut self, seq: &MarkerSequence<T>, frame: usize, settings: &SolverSettings<T>) -> Result<Option<(HandParams<T>, bool)>> {
        let obs = seq.observations(frame, self.entity);
        if obs.len() < MIN_HAND_MARKERS {
            return Ok(None);
        }
        let cold = || rigid_initialization(self.model, &obs, self.beta);
        let mut fit = match &self.last {
            Some(prev) => fit_hand(self.model, &obs, prev, settings)?,
            None => match cold() {
                Ok(init) => fit_hand(self.model, &obs, &init, settings)?,
                Err(Error::DegenerateInput(_)) => return Ok(None),
                Err(e) => return Err(e),
            },
        };
        if self.last.is_some() && fit.rms_residual > T::lit(REINIT_RMS) {
            if let Ok(init) = cold() {
                let retry = fit_hand(self.model, &obs, &init, settings)?;
                if retry.rms_residual < fit.rms_residual {
                    fit = retry;
                }
            }
        }
        self.last = Some(fit.params.clone());
        Ok(Some((fit.params, !fit.converged)))
    }
}

/// Linear interpolation over unsolved entries; leading and trailing gaps hold the nearest solved value.
fn fill_gaps<T: Real>(values: &mut [Vec<T>], solved: &[bool]) -> bool {
    let known: Vec<usize> = (0..values.len()).filter(|&i| solved[i]).collect();
    if known.is_empty() {
        return false;
    }
    for i in 0..values.len() {
        if solved[i] {
            continue;
        }
        let next = known.partition_point(|&k| k < i);
        let filled = match (next.checked_sub(1).map(|p| known[p]), known.get(next).copied()) {
            (Some(a), Some(b)) => {
                let w = T::from_usize_lossy(i - a) / T::from_usize_lossy(b - a);
                values[a]
                    .iter()
                    .zip(&values[b])
                    .map(|(&x, &y)| x + (y - x) * w)
                    .collect()
            }
            (Some(a), None) => values[a].clone(),
            (None, Some(b)) => values[b].clone(),
            (None, None) => unreachable!(),
        };
        values[i] = filled;
    }
    true
}

fn hand_vec<T: Real>(p: &HandParams<T>) -> Vec<T> {
    p.theta.iter().chain(&p.beta).chain(p.translation.iter()).copied().collect()
}

fn hand_from_vec<T: Real>(v: &[T]) -> HandParams<T> {
    let n = v.len();
    HandParams {
        theta: v[..48].to_vec(),
        beta: v[48..58].to_vec(),
        translation: Vector3::new(v[n - 3], v[n - 2], v[n - 1]),
    }
}

/// Solves every frame: rigid base pose and closed-form articulation for the
/// object, warm-started marker fits for both hands. Frames below the marker
/// minimum are flagged and filled by linear interpolation in parameter space.
pub fn solve_sequence<T: Real>(
    assets: &AssetBundle<T>,
    seq: &MarkerSequence<T>,
    settings: &SolverSettings<T>,
) -> Result<Vec<FramePose<T>>> {
    if seq.frames.is_empty() {
        return Err(Error::EmptySequence);
    }
    seq.validate()?;
    seq.check_against(assets)?;
    settings.validate()?;
    let n = seq.frames.len();
    let object = &assets.object;

    let mut tracks = [
        HandTrack {
            model: &assets.left,
            beta: &assets.left_beta,
            entity: MarkerEntity::LeftHand,
            last: None,
        },
        HandTrack {
            model: &assets.right,
            beta: &assets.right_beta,
            entity: MarkerEntity::RightHand,
            last: None,
        },
    ];
    let mut hands: [Vec<Vec<T>>; 2] = [vec![Vec::new(); n], vec![Vec::new(); n]];
    let mut hand_ok = [vec![false; n], vec![false; n]];
    let mut unconverged = [vec![false; n], vec![false; n]];
    let mut rigid = vec![Vec::new(); n];
    let mut rigid_ok = vec![false; n];
    let mut omega = vec![Vec::new(); n];
    let mut omega_ok = vec![false; n];

    for f in 0..n {
        let base_obs = seq.observations(f, MarkerEntity::ObjectBase);
        if base_obs.len() >= MIN_PART_MARKERS {
            let src: Vec<Point3<T>> = base_obs.iter().map(|o| object.base.vertices[o.0]).collect();
            let dst: Vec<Point3<T>> = base_obs.iter().map(|o| o.1).collect();
            match solve_rigid(&src, &dst, None) {
                Ok(fit) => {
                    let aa = fit.axis_angle();
                    rigid[f] = aa.iter().chain(fit.translation.iter()).copied().collect();
                    rigid_ok[f] = true;
                    let top_obs = seq.observations(f, MarkerEntity::ObjectTop);
                    if top_obs.len() >= MIN_PART_MARKERS {
                        match solve_articulation(object, &fit.isometry(), &top_obs) {
                            Ok(w) => {
                                omega[f] = vec![w];
                                omega_ok[f] = true;
                            }
                            Err(Error::UnobservableAngle) => {}
                            Err(e) => return Err(e),
                        }
                    }
                }
                Err(Error::DegenerateInput(_)) => {}
                Err(e) => return Err(e),
            }
        }
        for (h, track) in tracks.iter_mut().enumerate() {
            if let Some((params, flag)) = track.solve(seq, f, settings)? {
                hands[h][f] = hand_vec(&params);
                hand_ok[h][f] = true;
                unconverged[h][f] = flag;
            }
        }
    }

    let names = ["left hand", "right hand"];
    for h in 0..2 {
        if !fill_gaps(&mut hands[h], &hand_ok[h]) {
            return Err(Error::NoSolvableFrame(names[h].into()));
        }
    }
    if !fill_gaps(&mut rigid, &rigid_ok) {
        return Err(Error::NoSolvableFrame("object base".into()));
    }
    if !fill_gaps(&mut omega, &omega_ok) {
        return Err(Error::NoSolvableFrame("object top".into()));
    }

    Ok((0..n)
        .map(|f| FramePose {
            left: hand_from_vec(&hands[0][f]),
            right: hand_from_vec(&hands[1][f]),
            object: ObjectPose::new(
                omega[f][0],
                Vector3::new(rigid[f][0], rigid[f][1], rigid[f][2]),
                Vector3::new(rigid[f][3], rigid[f][4], rigid[f][5]),
            ),
            flags: FrameFlags {
                left_gap: !hand_ok[0][f],
                right_gap: !hand_ok[1][f],
                object_gap: !(rigid_ok[f] && omega_ok[f]),
                left_unconverged: unconverged[0][f],
                right_unconverged: unconverged[1][f],
            },
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HandRecord {
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
    #[serde(rename = "T")]
    pub translation: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectRecord {
    pub omega: f64,
    pub rot: [f64; 3],
    pub trans: [f64; 3],
}

/// One element of the pose file's top-level array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseRecord {
    pub left: HandRecord,
    pub right: HandRecord,
    pub object: ObjectRecord,
    #[serde(default)]
    pub flags: FrameFlags,
}

impl HandRecord {
    pub fn from_params<T: Real>(p: &HandParams<T>) -> Self {
        Self {
            theta: p.theta.iter().map(|v| v.to_f64_lossy()).collect(),
            beta: p.beta.iter().map(|v| v.to_f64_lossy()).collect(),
            translation: crate::geometry::vec_to_array(&p.translation),
        }
    }

    pub fn to_params<T: Real>(&self) -> Result<HandParams<T>> {
        let p = HandParams {
            theta: self.theta.iter().map(|&v| T::lit(v)).collect(),
            beta: self.beta.iter().map(|&v| T::lit(v)).collect(),
            translation: crate::geometry::to_vector(self.translation),
        };
        p.validate()?;
        Ok(p)
    }
}

impl ObjectRecord {
    pub fn from_pose<T: Real>(p: &ObjectPose<T>) -> Self {
        Self {
            omega: p.omega.to_f64_lossy(),
            rot: crate::geometry::vec_to_array(&p.rotation),
            trans: crate::geometry::vec_to_array(&p.translation),
        }
    }

    pub fn to_pose<T: Real>(&self) -> ObjectPose<T> {
        ObjectPose::new(
            T::lit(self.omega),
            crate::geometry::to_vector(self.rot),
            crate::geometry::to_vector(self.trans),
        )
    }
}

impl PoseRecord {
    pub fn from_frame<T: Real>(f: &FramePose<T>) -> Self {
        Self {
            left: HandRecord::from_params(&f.left),
            right: HandRecord::from_params(&f.right),
            object: ObjectRecord::from_pose(&f.object),
            flags: f.flags,
        }
    }

    pub fn to_frame<T: Real>(&self) -> Result<FramePose<T>> {
        Ok(FramePose {
            left: self.left.to_params()?,
            right: self.right.to_params()?,
            object: self.object.to_pose(),
            flags: self.flags,
        })
    }
}

pub fn save_poses<T: Real>(frames: &[FramePose<T>], path: impl AsRef<Path>) -> Result<()> {
    let records: Vec<PoseRecord> = frames.iter().map(PoseRecord::from_frame).collect();
    write_json(path.as_ref(), &records)
}

pub fn load_poses<T: Real>(path: impl AsRef<Path>) -> Result<Vec<FramePose<T>>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let records: Vec<PoseRecord> = serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    records
        .iter()
        .map(|r| r.to_frame().map_err(|e| Error::format(path, e.to_string())))
        .collect()
}
