//! Rotation helpers. Axis-angle vectors are the public rotation representation.

use nalgebra::{Isometry3, Point3, Rotation3, Translation3, Unit, UnitQuaternion, Vector3};

use crate::Real;

/// Rotation matrix for an axis-angle vector (Rodrigues).
pub fn rotation_from_axis_angle<T: Real>(axis_angle: &Vector3<T>) -> Rotation3<T> {
    Rotation3::new(*axis_angle)
}

/// Axis-angle vector with angle in `[0, π]`.
pub fn axis_angle_from_rotation<T: Real>(rotation: &Rotation3<T>) -> Vector3<T> {
    UnitQuaternion::from_rotation_matrix(rotation).scaled_axis()
}

/// Rotation by `angle` radians about a unit `axis`.
pub fn rotation_about<T: Real>(axis: &Unit<Vector3<T>>, angle: T) -> Rotation3<T> {
    Rotation3::from_axis_angle(axis, angle)
}

/// Geodesic angle between two rotations, radians.
pub fn rotation_distance<T: Real>(a: &Rotation3<T>, b: &Rotation3<T>) -> T {
    // Quaternion form keeps full precision near zero, where acos of the trace does not.
    let q = UnitQuaternion::from_rotation_matrix(&a.rotation_to(b));
    let two = T::one() + T::one();
    two * q.imag().norm().atan2(q.w.abs())
}

/// Rigid transform from an axis-angle rotation and a translation.
pub fn isometry<T: Real>(axis_angle: &Vector3<T>, translation: &Vector3<T>) -> Isometry3<T> {
    Isometry3::from_parts(
        Translation3::from(*translation),
        UnitQuaternion::from_scaled_axis(*axis_angle),
    )
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle<T: Real>(angle: T) -> T {
    let two_pi = T::two_pi();
    let mut a = angle % two_pi;
    if a <= -T::pi() {
        a += two_pi;
    } else if a > T::pi() {
        a -= two_pi;
    }
    a
}

pub(crate) fn centroid<T: Real>(points: &[Point3<T>]) -> Point3<T> {
    let mut acc = Vector3::zeros();
    for p in points {
        acc += p.coords;
    }
    Point3::from(acc / T::from_usize_lossy(points.len().max(1)))
}

pub(crate) fn to_point<T: Real>(p: [f64; 3]) -> Point3<T> {
    Point3::new(T::lit(p[0]), T::lit(p[1]), T::lit(p[2]))
}

pub(crate) fn to_array<T: Real>(p: &Point3<T>) -> [f64; 3] {
    [p.x.to_f64_lossy(), p.y.to_f64_lossy(), p.z.to_f64_lossy()]
}

pub(crate) fn vec_to_array<T: Real>(v: &Vector3<T>) -> [f64; 3] {
    [v.x.to_f64_lossy(), v.y.to_f64_lossy(), v.z.to_f64_lossy()]
}

pub(crate) fn to_vector<T: Real>(v: [f64; 3]) -> Vector3<T> {
    Vector3::new(T::lit(v[0]), T::lit(v[1]), T::lit(v[2]))
}
