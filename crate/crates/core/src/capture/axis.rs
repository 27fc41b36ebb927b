//! Hinge-axis calibration from top-part poses expressed in the base frame.
//!
//! Direction: per-frame rotation axes, sign-aligned and weighted by their
//! rotation angle, averaged and normalized. Origin: the point `p` minimizing
//! `Σ ‖(Rᵢ − I)p + tᵢ‖²` with its component along the direction fixed to
//! zero, since a hinge point is only defined up to sliding along the axis.

use nalgebra::{DMatrix, DVector, Isometry3, Matrix3, Point3, Unit, Vector3};

use crate::error::{Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisEstimate<T: Real> {
    /// Sign-normalized: the first non-negligible component is positive.
    pub direction: Unit<Vector3<T>>,
    pub origin: Point3<T>,
    /// RMS over frames of `‖(Rᵢ − I)p + tᵢ‖`.
    pub residual: T,
}

/// Minimum rotation (relative to the first frame) for a frame to count as informative.
pub const MIN_INFORMATIVE_ANGLE_DEG: f64 = 1.0;

/// Flips `v` so its first component with magnitude above `1e-9·‖v‖` is positive.
pub fn sign_normalize<T: Real>(v: Vector3<T>) -> Vector3<T> {
    let tol = v.norm() * T::lit(1e-9);
    match v.iter().find(|c| c.abs() > tol) {
        Some(c) if *c < T::zero() => -v,
        _ => v,
    }
}

fn orthonormal_complement<T: Real>(a: &Vector3<T>) -> (Vector3<T>, Vector3<T>) {
    let pick = if a.x.abs() <= a.y.abs() && a.x.abs() <= a.z.abs() {
        Vector3::x()
    } else if a.y.abs() <= a.z.abs() {
        Vector3::y()
    } else {
        Vector3::z()
    };
    let b1 = a.cross(&pick).normalize();
    let b2 = a.cross(&b1);
    (b1, b2)
}

pub fn estimate_axis<T: Real>(relative_poses: &[Isometry3<T>]) -> Result<AxisEstimate<T>> {
    if relative_poses.len() < 2 {
        return Err(Error::UnobservableAxis(format!(
            "need at least 2 frames, got {}",
            relative_poses.len()
        )));
    }
    let min_angle = T::lit(MIN_INFORMATIVE_ANGLE_DEG.to_radians());
    let first = relative_poses[0].rotation;
    let informative = relative_poses[1..]
        .iter()
        .filter(|p| first.angle_to(&p.rotation) > min_angle)
        .count();
    if informative == 0 {
        return Err(Error::UnobservableAxis(
            "no frame rotates more than 1 degree relative to the first".into(),
        ));
    }

    let axes: Vec<(Vector3<T>, T)> = relative_poses
        .iter()
        .map(|p| {
            let s = p.rotation.scaled_axis();
            let angle = s.norm();
            (s, angle)
        })
        .collect();
    let (reference, _) = axes
        .iter()
        .copied()
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty");
    let mut sum = Vector3::zeros();
    for (s, _) in &axes {
        // `s` already carries weight |angle|; align its sign with the reference
        if s.dot(&reference) < T::zero() {
            sum -= s;
        } else {
            sum += s;
        }
    }
    let norm = sum.norm();
    if !(norm > T::default_epsilon()) {
        return Err(Error::UnobservableAxis("all rotations are near identity".into()));
    }
    let direction = sign_normalize(sum / norm);

    let (b1, b2) = orthonormal_complement(&direction);
    let n = relative_poses.len();
    let mut a = DMatrix::zeros(3 * n, 2);
    let mut b = DVector::zeros(3 * n);
    for (i, pose) in relative_poses.iter().enumerate() {
        let m: Matrix3<T> = pose.rotation.to_rotation_matrix().into_inner() - Matrix3::identity();
        let c1 = m * b1;
        let c2 = m * b2;
        let t = pose.translation.vector;
        for r in 0..3 {
            a[(3 * i + r, 0)] = c1[r];
            a[(3 * i + r, 1)] = c2[r];
            b[3 * i + r] = -t[r];
        }
    }
    let q = a
        .clone()
        .svd(true, true)
        .solve(&b, T::default_epsilon())
        .map_err(|e| Error::UnobservableAxis(e.to_string()))?;
    let origin = Point3::from(b1 * q[0] + b2 * q[1]);

    let mut sq = T::zero();
    for pose in relative_poses {
        let m: Matrix3<T> = pose.rotation.to_rotation_matrix().into_inner() - Matrix3::identity();
        sq += (m * origin.coords + pose.translation.vector).norm_squared();
    }
    let residual = (sq / T::from_usize_lossy(n)).sqrt();
    Ok(AxisEstimate {
        direction: Unit::new_normalize(direction),
        origin,
        residual,
    })
}

/// Distance from `point` to the line through `origin` along `direction`.
pub fn distance_to_line<T: Real>(point: &Point3<T>, origin: &Point3<T>, direction: &Unit<Vector3<T>>) -> T {
    let d = point - origin;
    (d - direction.as_ref() * d.dot(direction)).norm()
}

/// Angle between two lines' directions, ignoring orientation, radians.
pub fn line_angle<T: Real>(a: &Vector3<T>, b: &Vector3<T>) -> T {
    a.cross(b).norm().atan2(a.dot(b).abs())
}
