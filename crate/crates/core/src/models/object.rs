//! Two-part articulated object with a single revolute joint.

use nalgebra::{Isometry3, Point3, Unit, Vector3};
use serde::{Deserialize, Serialize};

use super::mesh::Mesh;
use crate::error::{Error, Result};
use crate::geometry::{self, rotation_about};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Base,
    Top,
}

/// Seven-DOF object pose: articulation plus rigid pose of the base part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectPose<T: Real> {
    /// Absolute articulation angle, radians.
    pub omega: T,
    /// Axis-angle global rotation.
    pub rotation: Vector3<T>,
    pub translation: Vector3<T>,
}

impl<T: Real> ObjectPose<T> {
    pub fn new(omega: T, rotation: Vector3<T>, translation: Vector3<T>) -> Self {
        Self {
            omega,
            rotation,
            translation,
        }
    }

    pub fn rest(rest_angle: T) -> Self {
        Self::new(rest_angle, Vector3::zeros(), Vector3::zeros())
    }

    pub fn to_array(&self) -> [T; 7] {
        [
            self.omega,
            self.rotation.x,
            self.rotation.y,
            self.rotation.z,
            self.translation.x,
            self.translation.y,
            self.translation.z,
        ]
    }

    pub fn from_array(a: [T; 7]) -> Self {
        Self::new(
            a[0],
            Vector3::new(a[1], a[2], a[3]),
            Vector3::new(a[4], a[5], a[6]),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn rigid(&self) -> Isometry3<T> {
        geometry::isometry(&self.rotation, &self.translation)
    }
}

/// Canonical (scan-pose) description of an articulated object.
#[derive(Debug, Clone)]
pub struct ArticulatedObject<T: Real> {
    pub base: Mesh<T>,
    pub top: Mesh<T>,
    /// Point on the hinge, canonical frame.
    pub axis_origin: Point3<T>,
    pub axis_direction: Unit<Vector3<T>>,
    /// Articulation of the canonical scan pose.
    pub rest_angle: T,
    pub landmarks: Vec<(Part, usize)>,
}

impl<T: Real> ArticulatedObject<T> {
    pub fn new(
        base: Mesh<T>,
        top: Mesh<T>,
        axis_origin: Point3<T>,
        axis_direction: Vector3<T>,
        rest_angle: T,
        landmarks: Vec<(Part, usize)>,
    ) -> Result<Self> {
        base.validate()?;
        top.validate()?;
        let norm = axis_direction.norm();
        if !norm.is_finite() || (norm - T::one()).abs() > T::lit(1e-9) {
            return Err(Error::Asset(format!(
                "hinge axis direction must have unit norm, got {norm}"
            )));
        }
        let obj = Self {
            base,
            top,
            axis_origin,
            axis_direction: Unit::new_unchecked(axis_direction),
            rest_angle,
            landmarks,
        };
        for &(part, i) in &obj.landmarks {
            if i >= obj.part(part).len() {
                return Err(Error::Asset(format!("landmark {part:?}/{i} out of range")));
            }
        }
        Ok(obj)
    }

    pub fn part(&self, part: Part) -> &Mesh<T> {
        match part {
            Part::Base => &self.base,
            Part::Top => &self.top,
        }
    }

    /// Transform carrying canonical top-part points to the articulated,
    /// still canonically placed, top part.
    pub fn articulation(&self, omega: T) -> Isometry3<T> {
        let rot = rotation_about(&self.axis_direction, omega - self.rest_angle);
        let o = self.axis_origin.coords;
        Isometry3::from_parts((o - rot * o).into(), rot.into())
    }

    /// World transform of each part for `pose`.
    pub fn part_transforms(&self, pose: &ObjectPose<T>) -> (Isometry3<T>, Isometry3<T>) {
        let rigid = pose.rigid();
        (rigid, rigid * self.articulation(pose.omega))
    }

    /// Posed `(base, top)` meshes: the top part is rotated about the hinge by
    /// `omega - rest_angle`, then both parts take the rigid pose.
    pub fn pose(&self, pose: &ObjectPose<T>) -> Result<(Mesh<T>, Mesh<T>)> {
        if !pose.is_finite() {
            return Err(Error::Parameter("object pose must be finite".into()));
        }
        let (base_tf, top_tf) = self.part_transforms(pose);
        Ok((self.base.transformed(&base_tf), self.top.transformed(&top_tf)))
    }

    /// Whole posed object as one mesh, base vertices first.
    pub fn pose_combined(&self, pose: &ObjectPose<T>) -> Result<Mesh<T>> {
        let (b, t) = self.pose(pose)?;
        Ok(Mesh::concat(&[&b, &t]))
    }

    /// Evaluation root: centroid of the posed base part.
    pub fn root(&self, pose: &ObjectPose<T>) -> Point3<T> {
        pose.rigid() * self.base.centroid()
    }

    pub fn landmark_points(&self, pose: &ObjectPose<T>) -> Vec<Point3<T>> {
        let (b, t) = self.part_transforms(pose);
        self.landmarks
            .iter()
            .map(|&(part, i)| match part {
                Part::Base => b * self.base.vertices[i],
                Part::Top => t * self.top.vertices[i],
            })
            .collect()
    }
}
