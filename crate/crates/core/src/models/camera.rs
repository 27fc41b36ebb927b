//! Weak-perspective camera and its perspective equivalent.

use nalgebra::{Point2, Point3, Vector3};

use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraParams<T: Real> {
    /// Weak-perspective scale `s`.
    pub scale: T,
    /// `t_x`, pixels.
    pub tx: T,
    /// `t_y`, pixels.
    pub ty: T,
    /// Focal length, pixels.
    pub focal: T,
    /// Square image patch width, pixels. The principal point sits at its center.
    pub patch_width: T,
}

impl<T: Real> CameraParams<T> {
    pub fn new(scale: T, tx: T, ty: T, focal: T, patch_width: T) -> Self {
        Self {
            scale,
            tx,
            ty,
            focal,
            patch_width,
        }
    }

    pub fn weak(&self) -> [T; 3] {
        [self.scale, self.tx, self.ty]
    }
}

/// Perspective translation `(t_x, t_y, 2f / (w s))` equivalent to the weak-perspective camera.
pub fn weak_to_perspective<T: Real>(cam: &CameraParams<T>) -> Result<Vector3<T>> {
    if !(cam.scale > T::zero()) {
        return Err(Error::DegenerateScale(cam.scale.to_f64_lossy()));
    }
    if !(cam.focal > T::zero() && cam.patch_width > T::zero()) {
        return Err(Error::Parameter(
            "focal length and patch width must be positive".into(),
        ));
    }
    let tz = (T::one() + T::one()) * cam.focal / (cam.patch_width * cam.scale);
    Ok(Vector3::new(cam.tx, cam.ty, tz))
}

/// Pinhole projection of `points` translated by [`weak_to_perspective`].
pub fn project<T: Real>(points: &[Point3<T>], cam: &CameraParams<T>) -> Result<Vec<Point2<T>>> {
    let t = weak_to_perspective(cam)?;
    let center = cam.patch_width / (T::one() + T::one());
    points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let q = p + t;
            if !(q.z > T::zero()) {
                return Err(Error::BehindCamera {
                    index: i,
                    depth: q.z.to_f64_lossy(),
                });
            }
            Ok(Point2::new(
                cam.focal * q.x / q.z + center,
                cam.focal * q.y / q.z + center,
            ))
        })
        .collect()
}
