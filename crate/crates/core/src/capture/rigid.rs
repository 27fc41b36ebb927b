//! Weighted Kabsch alignment.

use nalgebra::{Isometry3, Matrix3, Point3, Rotation3, SymmetricEigen, Translation3, UnitQuaternion, Vector3};

use crate::error::{check_len, Error, Result};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidFit<T: Real> {
    pub rotation: Rotation3<T>,
    pub translation: Vector3<T>,
    /// Weighted RMS over residual components, `sqrt(Σ wᵢ‖rᵢ‖² / (3 Σ wᵢ))`.
    pub rms_residual: T,
}

impl<T: Real> RigidFit<T> {
    pub fn axis_angle(&self) -> Vector3<T> {
        crate::geometry::axis_angle_from_rotation(&self.rotation)
    }

    pub fn isometry(&self) -> Isometry3<T> {
        Isometry3::from_parts(
            Translation3::from(self.translation),
            UnitQuaternion::from_rotation_matrix(&self.rotation),
        )
    }
}

/// Rotation `R` (det +1) and translation `t` minimizing `Σ wᵢ‖R·sourceᵢ + t − targetᵢ‖²`.
pub fn solve_rigid<T: Real>(
    source: &[Point3<T>],
    target: &[Point3<T>],
    weights: Option<&[T]>,
) -> Result<RigidFit<T>> {
    check_len("target points", source.len(), target.len())?;
    if let Some(w) = weights {
        check_len("weights", source.len(), w.len())?;
        if w.iter().any(|&x| !(x >= T::zero()) || !x.is_finite()) {
            return Err(Error::DegenerateInput("weights must be finite and non-negative".into()));
        }
    }
    let weight = |i: usize| weights.map_or(T::one(), |w| w[i]);
    let active = (0..source.len()).filter(|&i| weight(i) > T::zero()).count();
    if active < 3 {
        return Err(Error::DegenerateInput(format!(
            "rigid alignment needs at least 3 weighted points, got {active}"
        )));
    }

    let mut wsum = T::zero();
    let mut cs = Vector3::zeros();
    let mut ct = Vector3::zeros();
    for i in 0..source.len() {
        let w = weight(i);
        wsum += w;
        cs += source[i].coords * w;
        ct += target[i].coords * w;
    }
    cs /= wsum;
    ct /= wsum;

    let mut cov_s = Matrix3::zeros();
    let mut cross = Matrix3::zeros();
    for i in 0..source.len() {
        let w = weight(i);
        let s = source[i].coords - cs;
        let t = target[i].coords - ct;
        cov_s += s * s.transpose() * w;
        cross += s * t.transpose() * w;
    }
    let mut ev = SymmetricEigen::new(cov_s).eigenvalues;
    ev.as_mut_slice().sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    if !(ev[0] > T::zero()) || ev[1] <= ev[0] * T::default_epsilon() * T::lit(1e4) {
        return Err(Error::DegenerateInput(
            "source points are coincident or collinear".into(),
        ));
    }

    let svd = cross.svd(true, true);
    let (u, v_t) = match (svd.u, svd.v_t) {
        (Some(u), Some(v_t)) => (u, v_t),
        _ => return Err(Error::DegenerateInput("SVD did not converge".into())),
    };
    let v = v_t.transpose();
    let mut d = Matrix3::identity();
    if (v * u.transpose()).determinant() < T::zero() {
        d[(2, 2)] = -T::one();
    }
    let rotation = UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(v * d * u.transpose()))
        .to_rotation_matrix();
    let r = *rotation.matrix();
    let translation = ct - r * cs;

    let mut sq = T::zero();
    for i in 0..source.len() {
        sq += (r * source[i].coords + translation - target[i].coords).norm_squared() * weight(i);
    }
    let rms_residual = (sq / (wsum * T::lit(3.0))).sqrt();
    Ok(RigidFit {
        rotation,
        translation,
        rms_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{rotation_distance, rotation_from_axis_angle};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_distr::{Distribution, Normal};

    fn cloud(seed: u64, n: usize) -> Vec<Point3<f64>> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Point3::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)))
            .collect()
    }

    #[test]
    fn identity_alignment() {
        let src = cloud(1, 8);
        let fit = solve_rigid(&src, &src, None).unwrap();
        assert!(fit.axis_angle().norm() < 1e-12, "{fit:?}");
        assert!(fit.translation.norm() < 1e-12);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn recovers_quarter_turn_and_offset() {
        let src = cloud(2, 10);
        let r = rotation_from_axis_angle(&Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2));
        let t = Vector3::new(1.0, 2.0, 3.0);
        let dst: Vec<_> = src.iter().map(|p| r * p + t).collect();
        let fit = solve_rigid(&src, &dst, None).unwrap();
        assert!(rotation_distance(&fit.rotation, &r) < 1e-9);
        assert_relative_eq!(fit.translation, t, epsilon = 1e-9);
        assert!(fit.rms_residual < 1e-9);
        assert_relative_eq!(fit.rotation.matrix().determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reflection_guard_keeps_proper_rotation() {
        let src = cloud(3, 6);
        let dst: Vec<_> = src.iter().map(|p| Point3::new(p.x, p.y, -p.z)).collect();
        let fit = solve_rigid(&src, &dst, None).unwrap();
        assert_relative_eq!(fit.rotation.matrix().determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let two = cloud(4, 2);
        assert!(matches!(solve_rigid(&two, &two, None), Err(Error::DegenerateInput(_))));
        let line: Vec<_> = (0..5).map(|i| Point3::new(i as f64, 2.0 * i as f64, 0.0)).collect();
        assert!(matches!(solve_rigid(&line, &line, None), Err(Error::DegenerateInput(_))));
        let src = cloud(5, 5);
        assert!(solve_rigid(&src, &src[..4], None).is_err());
        let w = [1.0, 1.0, 0.0, 0.0, 0.0];
        assert!(solve_rigid(&src, &src, Some(&w)).is_err());
    }

    #[test]
    fn weights_ignore_outlier() {
        let src = cloud(6, 7);
        let t = Vector3::new(0.1, 0.0, -0.2);
        let mut dst: Vec<_> = src.iter().map(|p| p + t).collect();
        dst[6] += Vector3::new(0.5, 0.5, 0.5);
        let w = [1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0];
        let fit = solve_rigid(&src, &dst, Some(&w)).unwrap();
        assert_relative_eq!(fit.translation, t, epsilon = 1e-12);
    }

    #[test]
    fn noisy_residual_tracks_sigma() {
        let sigma = 0.0005;
        let noise = Normal::new(0.0, sigma).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let r = rotation_from_axis_angle(&Vector3::new(0.3, -0.4, 0.2));
        let t = Vector3::new(0.2, 0.1, 0.5);
        for trial in 0..100 {
            let src = cloud(100 + trial, 12);
            let dst: Vec<_> = src
                .iter()
                .map(|p| r * p + t + Vector3::from_fn(|_, _| noise.sample(&mut rng)))
                .collect();
            let fit = solve_rigid(&src, &dst, None).unwrap();
            assert!(fit.rms_residual >= 0.5 * sigma && fit.rms_residual <= 1.5 * sigma, "{}", fit.rms_residual);
        }
    }

    proptest! {
        #[test]
        fn conjugation_equivariance(seed in 0u64..1000, q in prop::array::uniform3(-3.0f64..3.0), a in prop::array::uniform3(-2.0f64..2.0)) {
            let src = cloud(seed, 9);
            let r = rotation_from_axis_angle(&Vector3::from(a));
            let dst: Vec<_> = src.iter().map(|p| r * p + Vector3::new(0.3, -0.1, 0.2)).collect();
            let qr = rotation_from_axis_angle(&Vector3::from(q));
            let src_q: Vec<_> = src.iter().map(|p| qr * p).collect();
            let dst_q: Vec<_> = dst.iter().map(|p| qr * p).collect();
            let base = solve_rigid(&src, &dst, None).unwrap();
            let conj = solve_rigid(&src_q, &dst_q, None).unwrap();
            let expected = qr * base.rotation * qr.inverse();
            prop_assert!(rotation_distance(&conj.rotation, &expected) < 1e-9);
        }

        #[test]
        fn residual_ignores_order(seed in 0u64..1000, shift in 1usize..8) {
            let src = cloud(seed, 8);
            let dst = cloud(seed + 5000, 8);
            let a = solve_rigid(&src, &dst, None).unwrap();
            let mut s2 = src.clone();
            let mut d2 = dst.clone();
            s2.rotate_left(shift);
            d2.rotate_left(shift);
            let b = solve_rigid(&s2, &d2, None).unwrap();
            prop_assert!((a.rms_residual - b.rms_residual).abs() < 1e-12);
        }
    }
}
