//! One-dimensional articulation solve about a known hinge.

use nalgebra::{Isometry3, Point3};

use crate::error::{Error, Result};
use crate::geometry::wrap_angle;
use crate::models::ArticulatedObject;
use crate::Real;

/// `Σ ‖rot(axis, ω − rest)·vᵢ − mᵢ‖²` with markers `mᵢ` mapped into the base frame.
pub fn articulation_objective<T: Real>(
    object: &ArticulatedObject<T>,
    base_pose: &Isometry3<T>,
    observations: &[(usize, Point3<T>)],
    omega: T,
) -> T {
    let art = object.articulation(omega);
    observations
        .iter()
        .map(|(v, m)| (art * object.top.vertices[*v] - base_pose.inverse_transform_point(m)).norm_squared())
        .fold(T::zero(), |a, b| a + b)
}

/// Closed-form global minimizer of [`articulation_objective`].
///
/// `observations` pairs top-part vertex indices with observed world marker
/// positions. With `uᵢ` and `qᵢ` the canonical vertex and base-frame marker
/// relative to the hinge origin, the optimal rotation is
/// `atan2(Σ qᵢ·(a × uᵢ), Σ qᵢ·u⊥ᵢ)`. Returns `rest_angle + φ` with `φ` in `(−π, π]`.
pub fn solve_articulation<T: Real>(
    object: &ArticulatedObject<T>,
    base_pose: &Isometry3<T>,
    observations: &[(usize, Point3<T>)],
) -> Result<T> {
    if let Some((v, _)) = observations.iter().find(|(v, _)| *v >= object.top.len()) {
        return Err(Error::Parameter(format!("top-part vertex {v} out of range")));
    }
    let axis = object.axis_direction.into_inner();
    let o = object.axis_origin;
    let mut cos_term = T::zero();
    let mut sin_term = T::zero();
    let mut lever = T::zero();
    for (v, m) in observations {
        let u = object.top.vertices[*v] - o;
        let q = base_pose.inverse_transform_point(m) - o;
        let u_perp = u - axis * u.dot(&axis);
        lever = lever.max(u_perp.norm());
        cos_term += q.dot(&u_perp);
        sin_term += q.dot(&axis.cross(&u_perp));
    }
    if !(lever > T::default_epsilon().sqrt() * T::lit(1e-2)) {
        return Err(Error::UnobservableAngle);
    }
    Ok(object.rest_angle + wrap_angle(sin_term.atan2(cos_term)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::isometry;
    use crate::models::ObjectPose;
    use crate::synth::objects::{generate_object_asset, ObjectKind};
    use nalgebra::Vector3;
    use proptest::prelude::*;

    fn observe(obj: &ArticulatedObject<f64>, pose: &ObjectPose<f64>, idx: &[usize]) -> Vec<(usize, Point3<f64>)> {
        let (_, top) = obj.part_transforms(pose);
        idx.iter().map(|&i| (i, top * obj.top.vertices[i])).collect()
    }

    #[test]
    fn recovers_known_angle() {
        let obj = generate_object_asset::<f64>(ObjectKind::BoxHinge, 3).unwrap();
        let pose = ObjectPose::new(0.7, Vector3::new(0.2, -0.5, 0.1), Vector3::new(0.3, 0.1, 0.6));
        let obs = observe(&obj, &pose, &[0, 5, 17, 30]);
        let omega = solve_articulation(&obj, &pose.rigid(), &obs).unwrap();
        assert!((omega - 0.7).abs() < 1e-9);
    }

    #[test]
    fn rest_markers_give_rest_angle() {
        let mut obj = generate_object_asset::<f64>(ObjectKind::Flap, 2).unwrap();
        obj.rest_angle = 0.25;
        let pose = ObjectPose::rest(0.25);
        let obs = observe(&obj, &pose, &[1, 9, 20]);
        let omega = solve_articulation(&obj, &pose.rigid(), &obs).unwrap();
        assert!((omega - 0.25).abs() < 1e-12);
    }

    #[test]
    fn marker_on_hinge_is_unobservable() {
        let obj = generate_object_asset::<f64>(ObjectKind::ScissorsLike, 1).unwrap();
        let on_axis = Point3::new(0.0, 0.0, 0.004);
        let mut o = obj.clone();
        o.top.vertices.push(on_axis);
        let obs = vec![(o.top.len() - 1, on_axis)];
        assert!(matches!(
            solve_articulation(&o, &Isometry3::identity(), &obs),
            Err(Error::UnobservableAngle)
        ));
    }

    proptest! {
        #[test]
        fn beats_uniform_grid(omega in -3.0f64..3.0, noise_seed in 0u64..500, rx in -1.0f64..1.0) {
            use rand::{Rng, SeedableRng};
            let obj = generate_object_asset::<f64>(ObjectKind::BoxHinge, 2).unwrap();
            let pose = ObjectPose::new(omega, Vector3::new(rx, 0.3, -0.2), Vector3::new(0.1, 0.0, 0.4));
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(noise_seed);
            let obs: Vec<_> = observe(&obj, &pose, &[2, 7, 11, 19, 23])
                .into_iter()
                .map(|(i, p)| (i, p + Vector3::from_fn(|_, _| rng.random_range(-0.01..0.01))))
                .collect();
            let base = isometry(&pose.rotation, &pose.translation);
            let best = solve_articulation(&obj, &base, &obs).unwrap();
            let f_best = articulation_objective(&obj, &base, &obs, best);
            for k in 0..256 {
                let w = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / 256.0;
                prop_assert!(f_best <= articulation_objective(&obj, &base, &obs, w) + 1e-15);
            }
        }
    }
}
