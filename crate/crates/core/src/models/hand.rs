//! Skinned parametric hand: shape blendshapes, forward kinematics over a
//! 16-joint tree and linear blend skinning.
//!
//! Pose correctives are not modelled. The skeleton follows the shape: the
//! rest position of joint `k` is its stored rest position plus regressor row
//! `k` applied to the shape displacement, so the first 16 regressor rows are
//! the skeleton joints and rows 16..21 the fingertips.

use nalgebra::{DMatrix, Matrix3, Point3, Vector3};

use super::mesh::Mesh;
use crate::error::{check_len, Error, Result};
use crate::geometry::rotation_from_axis_angle;
use crate::Real;

pub const NUM_JOINTS: usize = 16;
pub const NUM_SHAPE: usize = 10;
/// 16 skeleton joints followed by 5 fingertips.
pub const NUM_REGRESSED: usize = 21;
pub const POSE_DIM: usize = 3 * NUM_JOINTS;

const SUM_TOLERANCE: f64 = 1e-6;

/// Pose, shape and translation of one hand.
#[derive(Debug, Clone, PartialEq)]
pub struct HandParams<T: Real> {
    /// Axis-angle per joint, root (global rotation) first; radians.
    pub theta: Vec<T>,
    pub beta: Vec<T>,
    pub translation: Vector3<T>,
}

impl<T: Real> HandParams<T> {
    pub fn zeros() -> Self {
        Self {
            theta: vec![T::zero(); POSE_DIM],
            beta: vec![T::zero(); NUM_SHAPE],
            translation: Vector3::zeros(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_len("theta", POSE_DIM, self.theta.len())?;
        check_len("beta", NUM_SHAPE, self.beta.len())?;
        let finite = self
            .theta
            .iter()
            .chain(&self.beta)
            .chain(self.translation.iter())
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Parameter("hand parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn joint_axis_angle(&self, joint: usize) -> Vector3<T> {
        Vector3::new(
            self.theta[3 * joint],
            self.theta[3 * joint + 1],
            self.theta[3 * joint + 2],
        )
    }

    pub fn set_joint_axis_angle(&mut self, joint: usize, v: &Vector3<T>) {
        self.theta[3 * joint..3 * joint + 3].copy_from_slice(v.as_slice());
    }
}

/// Raw arrays making up a hand model, as stored in an asset.
#[derive(Debug, Clone)]
pub struct HandModelParts<T: Real> {
    pub template: Mesh<T>,
    /// Per vertex, one displacement (meters per unit coefficient) per shape coefficient.
    pub shape_blendshapes: Vec<[Vector3<T>; NUM_SHAPE]>,
    /// `V × 16`.
    pub skinning_weights: DMatrix<T>,
    pub parents: Vec<Option<usize>>,
    /// Offset of each joint from its parent in the canonical pose; absolute for the root.
    pub rest_joint_offsets: Vec<Vector3<T>>,
    /// `21 × V`.
    pub joint_regressor: DMatrix<T>,
}

/// Immutable, validated hand model.
#[derive(Debug, Clone)]
pub struct HandModel<T: Real> {
    parts: HandModelParts<T>,
    rest_joints: Vec<Point3<T>>,
    order: Vec<usize>,
    sparse_weights: Vec<Vec<(usize, T)>>,
    sparse_regressor: Vec<Vec<(usize, T)>>,
}

/// World transform of every joint for one parameter set.
#[derive(Debug, Clone)]
pub struct PosedSkeleton<T: Real> {
    pub rotations: Vec<Matrix3<T>>,
    /// Posed joint positions (before the global translation).
    pub positions: Vec<Point3<T>>,
    /// Skinning transform translation `t_k - R_k j_k`.
    skin_offsets: Vec<Vector3<T>>,
    translation: Vector3<T>,
}

fn sparse_rows<T: Real>(m: &DMatrix<T>) -> Vec<Vec<(usize, T)>> {
    (0..m.nrows())
        .map(|r| {
            let sum = m.row(r).iter().fold(T::zero(), |a, &b| a + b);
            (0..m.ncols())
                .filter(|&c| m[(r, c)] != T::zero())
                .map(|c| (c, m[(r, c)] / sum))
                .collect()
        })
        .collect()
}

fn topological_order(parents: &[Option<usize>]) -> Result<Vec<usize>> {
    let n = parents.len();
    let roots: Vec<usize> = (0..n).filter(|&k| parents[k].is_none()).collect();
    if roots.len() != 1 {
        return Err(Error::Asset(format!(
            "kinematic tree needs exactly one root, found {}",
            roots.len()
        )));
    }
    if let Some(k) = (0..n).find(|&k| parents[k].is_some_and(|p| p >= n || p == k)) {
        return Err(Error::Asset(format!("joint {k} has an invalid parent")));
    }
    let mut order = roots;
    let mut placed = vec![false; n];
    placed[order[0]] = true;
    while order.len() < n {
        let before = order.len();
        for k in 0..n {
            if !placed[k] && parents[k].is_some_and(|p| placed[p]) {
                placed[k] = true;
                order.push(k);
            }
        }
        if order.len() == before {
            return Err(Error::Asset("kinematic tree contains a cycle".into()));
        }
    }
    Ok(order)
}

impl<T: Real> HandModel<T> {
    pub fn new(parts: HandModelParts<T>) -> Result<Self> {
        parts.template.validate()?;
        let v = parts.template.len();
        check_len("shape blendshapes", v, parts.shape_blendshapes.len())?;
        check_len("skinning weight rows", v, parts.skinning_weights.nrows())?;
        check_len("skinning weight columns", NUM_JOINTS, parts.skinning_weights.ncols())?;
        check_len("parents", NUM_JOINTS, parts.parents.len())?;
        check_len("rest joint offsets", NUM_JOINTS, parts.rest_joint_offsets.len())?;
        check_len("regressor rows", NUM_REGRESSED, parts.joint_regressor.nrows())?;
        check_len("regressor columns", v, parts.joint_regressor.ncols())?;

        let tol = T::lit(SUM_TOLERANCE);
        for (r, row) in parts.skinning_weights.row_iter().enumerate() {
            if row.iter().any(|&w| w < T::zero() || !w.is_finite()) {
                return Err(Error::Asset(format!("negative skinning weight at vertex {r}")));
            }
            let s = row.iter().fold(T::zero(), |a, &b| a + b);
            if (s - T::one()).abs() > tol {
                return Err(Error::Asset(format!(
                    "skinning weights of vertex {r} sum to {s}"
                )));
            }
        }
        for (r, row) in parts.joint_regressor.row_iter().enumerate() {
            let s = row.iter().fold(T::zero(), |a, &b| a + b);
            if (s - T::one()).abs() > tol {
                return Err(Error::Asset(format!("regressor row {r} sums to {s}")));
            }
        }
        let order = topological_order(&parts.parents)?;

        let mut rest_joints = vec![Point3::origin(); NUM_JOINTS];
        for &k in &order {
            let base = match parts.parents[k] {
                Some(p) => rest_joints[p],
                None => Point3::origin(),
            };
            rest_joints[k] = base + parts.rest_joint_offsets[k];
        }

        Ok(Self {
            sparse_weights: sparse_rows(&parts.skinning_weights),
            sparse_regressor: sparse_rows(&parts.joint_regressor),
            rest_joints,
            order,
            parts,
        })
    }

    pub fn parts(&self) -> &HandModelParts<T> {
        &self.parts
    }

    pub fn template(&self) -> &Mesh<T> {
        &self.parts.template
    }

    pub fn num_vertices(&self) -> usize {
        self.parts.template.len()
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parts.parents
    }

    /// Canonical joint positions for zero shape.
    pub fn rest_joints(&self) -> &[Point3<T>] {
        &self.rest_joints
    }

    fn shape_offset(&self, vertex: usize, beta: &[T]) -> Vector3<T> {
        let mut d = Vector3::zeros();
        for (b, dir) in beta.iter().zip(&self.parts.shape_blendshapes[vertex]) {
            if *b != T::zero() {
                d += dir * *b;
            }
        }
        d
    }

    fn shaped_joints(&self, beta: &[T]) -> Vec<Point3<T>> {
        if beta.iter().all(|b| *b == T::zero()) {
            return self.rest_joints.clone();
        }
        (0..NUM_JOINTS)
            .map(|k| {
                let mut shift = Vector3::zeros();
                for &(v, w) in &self.sparse_regressor[k] {
                    shift += self.shape_offset(v, beta) * w;
                }
                self.rest_joints[k] + shift
            })
            .collect()
    }

    /// Forward kinematics for `params`.
    pub fn skeleton(&self, params: &HandParams<T>) -> Result<PosedSkeleton<T>> {
        params.validate()?;
        let joints = self.shaped_joints(&params.beta);
        let mut rotations = vec![Matrix3::identity(); NUM_JOINTS];
        let mut positions = vec![Point3::origin(); NUM_JOINTS];
        for &k in &self.order {
            let local = *rotation_from_axis_angle(&params.joint_axis_angle(k)).matrix();
            match self.parts.parents[k] {
                None => {
                    rotations[k] = local;
                    positions[k] = joints[k];
                }
                Some(p) => {
                    rotations[k] = rotations[p] * local;
                    positions[k] = positions[p] + rotations[p] * (joints[k] - joints[p]);
                }
            }
        }
        let skin_offsets = (0..NUM_JOINTS)
            .map(|k| positions[k].coords - rotations[k] * joints[k].coords)
            .collect();
        Ok(PosedSkeleton {
            rotations,
            positions,
            skin_offsets,
            translation: params.translation,
        })
    }

    fn skin_vertex(&self, skel: &PosedSkeleton<T>, beta: &[T], vertex: usize) -> Point3<T> {
        let rest = self.parts.template.vertices[vertex].coords + self.shape_offset(vertex, beta);
        let mut out = Vector3::zeros();
        for &(k, w) in &self.sparse_weights[vertex] {
            out += (skel.rotations[k] * rest + skel.skin_offsets[k]) * w;
        }
        Point3::from(out + skel.translation)
    }

    /// Posed, shaped mesh: blendshapes, forward kinematics, skinning, translation.
    pub fn pose(&self, params: &HandParams<T>) -> Result<Mesh<T>> {
        let skel = self.skeleton(params)?;
        let vertices = (0..self.num_vertices())
            .map(|v| self.skin_vertex(&skel, &params.beta, v))
            .collect();
        Ok(Mesh {
            vertices,
            faces: self.parts.template.faces.clone(),
        })
    }

    /// Posed positions of selected vertices only.
    pub fn pose_vertices(&self, params: &HandParams<T>, indices: &[usize]) -> Result<Vec<Point3<T>>> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.num_vertices()) {
            return Err(Error::Parameter(format!("vertex index {bad} out of range")));
        }
        let skel = self.skeleton(params)?;
        Ok(indices
            .iter()
            .map(|&v| self.skin_vertex(&skel, &params.beta, v))
            .collect())
    }

    /// Applies the joint regressor to posed vertices.
    pub fn regress_joints(&self, posed: &Mesh<T>) -> Result<Vec<Point3<T>>> {
        check_len("posed vertices", self.num_vertices(), posed.len())?;
        Ok(self
            .sparse_regressor
            .iter()
            .map(|row| {
                let mut acc = Vector3::zeros();
                for &(v, w) in row {
                    acc += posed.vertices[v].coords * w;
                }
                Point3::from(acc)
            })
            .collect())
    }

    /// The 21 regressed joints of the posed hand, skinning only the vertices the regressor reads.
    pub fn posed_joints(&self, params: &HandParams<T>) -> Result<Vec<Point3<T>>> {
        let skel = self.skeleton(params)?;
        Ok(self
            .sparse_regressor
            .iter()
            .map(|row| {
                let mut acc = Vector3::zeros();
                for &(v, w) in row {
                    acc += self.skin_vertex(&skel, &params.beta, v).coords * w;
                }
                Point3::from(acc)
            })
            .collect())
    }
}

impl<T: Real> PosedSkeleton<T> {
    /// Joint positions including the global translation.
    pub fn world_positions(&self) -> Vec<Point3<T>> {
        self.positions.iter().map(|p| p + self.translation).collect()
    }
}
