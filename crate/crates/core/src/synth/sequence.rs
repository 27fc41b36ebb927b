//! Animated hand-object sequences with simulated markers.

use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::config::SynthConfig;
use super::hand::{dorsal_marker_vertices, mitten_hand};
use super::objects::{generate_object_asset, object_marker_vertices};
use super::trajectory::random_walk;
use crate::capture::{FrameFlags, FramePose, MarkerCorrespondence, MarkerEntity, MarkerFrame, MarkerSequence};
use crate::error::Result;
use crate::metrics::SequenceMeta;
use crate::models::hand::{NUM_JOINTS, NUM_SHAPE};
use crate::models::{AssetBundle, HandParams, ObjectPose, Part};
use crate::Real;

/// Rest placement: the object near the origin, the right hand reaching in
/// from +x and the left hand from −x, both wrists a few centimeters away.
const RIGHT_WRIST: [f64; 3] = [0.21, 0.0, 0.08];
const RIGHT_ROTATION: [f64; 3] = [0.0, 0.0, std::f64::consts::PI];
const LEFT_WRIST: [f64; 3] = [-0.25, 0.0, 0.04];
const LEFT_ROTATION: [f64; 3] = [0.0, 0.0, 0.0];

/// Markers and ground truth for one generated sequence.
#[derive(Debug, Clone)]
pub struct SyntheticSequence<T: Real> {
    pub meta: SequenceMeta,
    pub markers: MarkerSequence<T>,
    pub ground_truth: Vec<FramePose<T>>,
}

/// Mitten hands with random subject shape and the configured object.
pub fn generate_assets<T: Real>(config: &SynthConfig) -> Result<AssetBundle<T>> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(2);
    let a = config.motion_amplitudes.shape;
    let mut beta = || -> Vec<T> { (0..NUM_SHAPE).map(|_| T::lit(if a > 0.0 { rng.random_range(-a..=a) } else { 0.0 })).collect() };
    let left_beta = beta();
    let right_beta = beta();
    Ok(AssetBundle {
        left: mitten_hand(true),
        right: mitten_hand(false),
        object: generate_object_asset(config.object_kind, config.object_resolution)?,
        left_beta,
        right_beta,
    })
}

fn hand_trajectory<T: Real>(
    rng: &mut ChaCha8Rng,
    config: &SynthConfig,
    wrist: [f64; 3],
    rotation: [f64; 3],
    beta: &[T],
) -> Vec<HandParams<T>> {
    let n = config.frame_count;
    let k = config.keyframe_interval;
    let m = &config.motion_amplitudes;
    let mut channels = Vec::with_capacity(3 * NUM_JOINTS + 3);
    for &base in &rotation {
        channels.push(random_walk(rng, n, k, base - m.hand_global_rotation, base + m.hand_global_rotation));
    }
    for _ in 3..3 * NUM_JOINTS {
        channels.push(random_walk(rng, n, k, -m.hand_joint, m.hand_joint));
    }
    for &base in &wrist {
        channels.push(random_walk(rng, n, k, base - m.hand_translation, base + m.hand_translation));
    }
    (0..n)
        .map(|f| HandParams {
            theta: (0..3 * NUM_JOINTS).map(|c| T::lit(channels[c][f])).collect(),
            beta: beta.to_vec(),
            translation: Vector3::from_fn(|i, _| T::lit(channels[3 * NUM_JOINTS + i][f])),
        })
        .collect()
}

/// Ground-truth trajectories plus markers posed from them, with per-axis
/// Gaussian noise and i.i.d. dropout. Deterministic in `config.seed`.
pub fn generate_sequence<T: Real>(assets: &AssetBundle<T>, config: &SynthConfig) -> Result<SyntheticSequence<T>> {
    config.validate()?;
    let n = config.frame_count;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let m = &config.motion_amplitudes;
    let a = &config.articulation_profile;

    let omega = random_walk(&mut rng, n, a.smoothness, a.min, a.max);
    let obj_rot: Vec<Vec<f64>> = (0..3)
        .map(|_| random_walk(&mut rng, n, config.keyframe_interval, -m.object_rotation, m.object_rotation))
        .collect();
    let obj_trans: Vec<Vec<f64>> = (0..3)
        .map(|_| random_walk(&mut rng, n, config.keyframe_interval, -m.object_translation, m.object_translation))
        .collect();
    let left = hand_trajectory(&mut rng, config, LEFT_WRIST, LEFT_ROTATION, &assets.left_beta);
    let right = hand_trajectory(&mut rng, config, RIGHT_WRIST, RIGHT_ROTATION, &assets.right_beta);

    let ground_truth: Vec<FramePose<T>> = (0..n)
        .map(|f| FramePose {
            left: left[f].clone(),
            right: right[f].clone(),
            object: ObjectPose::new(
                T::lit(omega[f]),
                Vector3::from_fn(|i, _| T::lit(obj_rot[i][f])),
                Vector3::from_fn(|i, _| T::lit(obj_trans[i][f])),
            ),
            flags: FrameFlags::default(),
        })
        .collect();

    let hand_idx = dorsal_marker_vertices(config.markers.hand_per_segment);
    let base_idx = object_marker_vertices(&assets.object, Part::Base, config.markers.object_per_part)?;
    let top_idx = object_marker_vertices(&assets.object, Part::Top, config.markers.object_per_part)?;
    let mut correspondences = Vec::new();
    for (prefix, entity, idx) in [
        ("LH", MarkerEntity::LeftHand, &hand_idx),
        ("RH", MarkerEntity::RightHand, &hand_idx),
        ("OB", MarkerEntity::ObjectBase, &base_idx),
        ("OT", MarkerEntity::ObjectTop, &top_idx),
    ] {
        correspondences.extend(idx.iter().enumerate().map(|(i, &v)| MarkerCorrespondence {
            marker_id: format!("{prefix}{i:02}"),
            entity,
            vertex_index: v,
        }));
    }

    let mut noise_rng = ChaCha8Rng::seed_from_u64(config.seed);
    noise_rng.set_stream(1);
    let noise = (config.marker_noise_sigma > 0.0).then(|| Normal::new(0.0, config.marker_noise_sigma).expect("sigma validated"));
    let mut frames = Vec::with_capacity(n);
    for (f, gt) in ground_truth.iter().enumerate() {
        let mut clean: Vec<Point3<T>> = Vec::with_capacity(correspondences.len());
        clean.extend(assets.left.pose_vertices(&gt.left, &hand_idx)?);
        clean.extend(assets.right.pose_vertices(&gt.right, &hand_idx)?);
        let (base_pose, top_pose) = assets.object.part_transforms(&gt.object);
        clean.extend(base_idx.iter().map(|&v| base_pose * assets.object.base.vertices[v]));
        clean.extend(top_idx.iter().map(|&v| top_pose * assets.object.top.vertices[v]));
        let positions = clean
            .into_iter()
            .map(|p| {
                let offset = noise.map(|d| Vector3::from_fn(|_, _| T::lit(d.sample(&mut noise_rng))));
                let dropped = config.dropout_rate > 0.0 && noise_rng.random::<f64>() < config.dropout_rate;
                (!dropped).then(|| offset.map_or(p, |o| p + o))
            })
            .collect();
        frames.push(MarkerFrame {
            time: T::lit(f as f64 / config.fps),
            positions,
        });
    }

    Ok(SyntheticSequence {
        meta: SequenceMeta {
            sequence_id: config.sequence_id.clone(),
            subject: config.subject.clone(),
            object: format!("{:?}", config.object_kind).to_lowercase(),
            view: 1,
        },
        markers: MarkerSequence::new(config.fps, correspondences, frames)?,
        ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet(seed: u64) -> SynthConfig {
        SynthConfig {
            seed,
            frame_count: 12,
            marker_noise_sigma: 0.0,
            dropout_rate: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn noise_free_markers_sit_on_posed_vertices() {
        let c = quiet(3);
        let assets = generate_assets::<f64>(&c).unwrap();
        let s = generate_sequence(&assets, &c).unwrap();
        for (f, gt) in s.ground_truth.iter().enumerate() {
            let obs = s.markers.observations(f, MarkerEntity::RightHand);
            let idx: Vec<usize> = obs.iter().map(|o| o.0).collect();
            let posed = assets.right.pose_vertices(&gt.right, &idx).unwrap();
            for (o, p) in obs.iter().zip(&posed) {
                assert_eq!(o.1, *p);
            }
            let (_, top) = assets.object.pose(&gt.object).unwrap();
            for (v, p) in s.markers.observations(f, MarkerEntity::ObjectTop) {
                assert!((top.vertices[v] - p).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn deterministic_in_seed() {
        let c = SynthConfig {
            frame_count: 10,
            ..Default::default()
        };
        let a = generate_assets::<f64>(&c).unwrap();
        let s1 = generate_sequence(&a, &c).unwrap();
        let s2 = generate_sequence(&a, &c).unwrap();
        assert_eq!(s1.markers, s2.markers);
        assert_eq!(s1.ground_truth, s2.ground_truth);
        let other = generate_sequence(&a, &SynthConfig { seed: 1, ..c }).unwrap();
        assert_ne!(other.ground_truth, s1.ground_truth);
    }

    #[test]
    fn parameters_within_amplitudes() {
        let c = SynthConfig {
            frame_count: 80,
            ..Default::default()
        };
        let assets = generate_assets::<f64>(&c).unwrap();
        let s = generate_sequence(&assets, &c).unwrap();
        let m = c.motion_amplitudes;
        for gt in &s.ground_truth {
            assert!(gt.object.omega >= c.articulation_profile.min && gt.object.omega <= c.articulation_profile.max);
            assert!(gt.object.translation.amax() <= m.object_translation);
            assert!(gt.object.rotation.amax() <= m.object_rotation);
            assert!(gt.right.theta[3..].iter().all(|v| v.abs() <= m.hand_joint));
            assert!((gt.right.translation - Vector3::from(RIGHT_WRIST)).amax() <= m.hand_translation);
            assert!(gt.left.theta.iter().chain(&gt.left.beta).all(|v| v.is_finite()));
        }
        assert!(assets.left_beta.iter().all(|b| b.abs() <= m.shape));
    }

    #[test]
    fn dropout_rate_matches_expectation() {
        let c = SynthConfig {
            frame_count: 400,
            dropout_rate: 0.2,
            ..Default::default()
        };
        let assets = generate_assets::<f64>(&c).unwrap();
        let s = generate_sequence(&assets, &c).unwrap();
        let total = s.markers.correspondences.len() * c.frame_count;
        let visible: usize = s.markers.frames.iter().map(|f| f.visible_count()).sum();
        let rate = 1.0 - visible as f64 / total as f64;
        // Binomial standard error here is about 0.001.
        assert!((rate - 0.2).abs() < 0.01, "{rate}");
    }
}
