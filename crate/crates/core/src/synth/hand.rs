//! Procedural low-poly "mitten" hand satisfying the hand-model contract.
//!
//! Sixteen box-section segments (palm plus three phalanges per digit), three
//! rings of four vertices each, fingertip vertices on the five distal
//! segments. Fingers point along +x, the dorsal side faces +z and the right
//! hand's thumb sits toward +y; the left hand mirrors y.

use nalgebra::{DMatrix, Point3, Vector3};

use crate::models::hand::{HandModel, HandModelParts, NUM_JOINTS, NUM_REGRESSED, NUM_SHAPE};
use crate::models::Mesh;
use crate::Real;

const RING: usize = 4;
const RINGS: usize = 3;
const SEG_VERTS: usize = RING * RINGS;
/// Joints whose segment ends in a fingertip, in fingertip-row order.
pub const DISTAL_JOINTS: [usize; 5] = [3, 6, 9, 12, 15];
pub const NUM_VERTICES: usize = NUM_JOINTS * SEG_VERTS + DISTAL_JOINTS.len();

pub const PARENTS: [Option<usize>; NUM_JOINTS] = [
    None,
    Some(0),
    Some(1),
    Some(2),
    Some(0),
    Some(4),
    Some(5),
    Some(0),
    Some(7),
    Some(8),
    Some(0),
    Some(10),
    Some(11),
    Some(0),
    Some(13),
    Some(14),
];

struct Segment {
    start: Vector3<f64>,
    dir: Vector3<f64>,
    length: f64,
    half_lateral: f64,
    half_dorsal: f64,
}

struct Digit {
    base: Vector3<f64>,
    dir: Vector3<f64>,
    lengths: [f64; 3],
}

fn digits() -> [Digit; 5] {
    let x = Vector3::x();
    [
        // index, middle, pinky, ring, thumb (joint blocks 1, 4, 7, 10, 13)
        Digit { base: Vector3::new(0.09, 0.03, 0.0), dir: x, lengths: [0.040, 0.025, 0.020] },
        Digit { base: Vector3::new(0.09, 0.01, 0.0), dir: x, lengths: [0.045, 0.028, 0.022] },
        Digit { base: Vector3::new(0.09, -0.03, 0.0), dir: x, lengths: [0.032, 0.020, 0.018] },
        Digit { base: Vector3::new(0.09, -0.01, 0.0), dir: x, lengths: [0.042, 0.026, 0.021] },
        Digit {
            base: Vector3::new(0.025, 0.04, -0.004),
            dir: Vector3::new(0.6, 0.8, 0.0),
            lengths: [0.035, 0.030, 0.025],
        },
    ]
}

fn segments() -> Vec<Segment> {
    let mut segs = vec![Segment {
        start: Vector3::zeros(),
        dir: Vector3::x(),
        length: 0.09,
        half_lateral: 0.04,
        half_dorsal: 0.012,
    }];
    for d in digits() {
        let mut start = d.base;
        for len in d.lengths {
            segs.push(Segment {
                start,
                dir: d.dir,
                length: len,
                half_lateral: 0.008,
                half_dorsal: 0.007,
            });
            start += d.dir * len;
        }
    }
    segs
}

fn digit_of(joint: usize) -> Option<usize> {
    (joint > 0).then(|| (joint - 1) / 3)
}

/// Per-vertex displacement for each shape coefficient, meters per unit.
fn blendshape(joint: usize, p: &Vector3<f64>, seg: &Segment) -> [Vector3<f64>; NUM_SHAPE] {
    let mut out = [Vector3::zeros(); NUM_SHAPE];
    out[1] = Vector3::new((p.x - 0.09).max(0.0) * 0.06, 0.0, 0.0);
    out[2] = Vector3::new(0.0, p.y * 0.05, 0.0);
    out[3] = Vector3::new(0.0, 0.0, p.z * 0.15);
    out[4] = Vector3::new(p.x.min(0.09) * 0.03, 0.0, 0.0);
    if let Some(d) = digit_of(joint) {
        let along = (p - seg.start).dot(&seg.dir).max(0.0)
            + digits()[d]
                .lengths
                .iter()
                .take((joint - 1) % 3)
                .sum::<f64>();
        let rel = p - seg.start;
        out[0] = (rel - seg.dir * rel.dot(&seg.dir)) * 0.15;
        if d == 4 {
            out[5] = Vector3::new(0.0, 0.003, 0.0);
        }
        if d < 4 {
            out[6 + d] = seg.dir * (along * 0.03);
        }
    }
    out
}

/// Builds the mitten hand model. `left` mirrors the right hand across the xz plane.
pub fn mitten_hand<T: Real>(left: bool) -> HandModel<T> {
    let segs = segments();
    let dorsal = Vector3::z();
    let mut vertices = Vec::with_capacity(NUM_VERTICES);
    let mut blend = Vec::with_capacity(NUM_VERTICES);
    let mut weights = DMatrix::<f64>::zeros(NUM_VERTICES, NUM_JOINTS);
    let mut faces = Vec::new();
    let mut regressor = DMatrix::<f64>::zeros(NUM_REGRESSED, NUM_VERTICES);

    for (k, seg) in segs.iter().enumerate() {
        let lateral = dorsal.cross(&seg.dir).normalize();
        let base = vertices.len();
        for r in 0..RINGS {
            let center = seg.start + seg.dir * (seg.length * r as f64 / (RINGS - 1) as f64);
            for (sl, sd) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
                let p = center + lateral * (sl * seg.half_lateral) + dorsal * (sd * seg.half_dorsal);
                let idx = vertices.len();
                match (r, PARENTS[k]) {
                    (0, Some(parent)) => {
                        weights[(idx, k)] = 0.5;
                        weights[(idx, parent)] = 0.5;
                    }
                    _ => weights[(idx, k)] = 1.0,
                }
                blend.push(blendshape(k, &p, seg));
                vertices.push(p);
            }
        }
        for i in 0..RING {
            regressor[(k, base + i)] = 0.25;
        }
        for r in 0..RINGS - 1 {
            for i in 0..RING {
                let j = (i + 1) % RING;
                let (a, b) = (base + r * RING + i, base + r * RING + j);
                let (c, d) = (base + (r + 1) * RING + j, base + (r + 1) * RING + i);
                faces.push([a, b, c]);
                faces.push([a, c, d]);
            }
        }
        faces.push([base, base + 2, base + 1]);
        faces.push([base, base + 3, base + 2]);
        if !DISTAL_JOINTS.contains(&k) {
            let e = base + (RINGS - 1) * RING;
            faces.push([e, e + 1, e + 2]);
            faces.push([e, e + 2, e + 3]);
        }
    }
    for (row, &k) in DISTAL_JOINTS.iter().enumerate() {
        let seg = &segs[k];
        let tip = seg.start + seg.dir * (seg.length + 0.004);
        let idx = vertices.len();
        weights[(idx, k)] = 1.0;
        blend.push(blendshape(k, &tip, seg));
        vertices.push(tip);
        regressor[(NUM_JOINTS + row, idx)] = 1.0;
        let e = k * SEG_VERTS + (RINGS - 1) * RING;
        for i in 0..RING {
            faces.push([e + i, e + (i + 1) % RING, idx]);
        }
    }

    let mut joints: Vec<Vector3<f64>> = segs.iter().map(|s| s.start).collect();
    if left {
        let mirror = |v: &mut Vector3<f64>| v.y = -v.y;
        vertices.iter_mut().for_each(mirror);
        joints.iter_mut().for_each(mirror);
        for dirs in &mut blend {
            dirs.iter_mut().for_each(mirror);
        }
        for f in &mut faces {
            f.swap(1, 2);
        }
    }
    let offsets = (0..NUM_JOINTS)
        .map(|k| match PARENTS[k] {
            Some(p) => joints[k] - joints[p],
            None => joints[k],
        })
        .map(|o| o.map(T::lit))
        .collect();

    let parts = HandModelParts {
        template: Mesh {
            vertices: vertices.iter().map(|v| Point3::from(v.map(T::lit))).collect(),
            faces,
        },
        shape_blendshapes: blend
            .iter()
            .map(|dirs| std::array::from_fn(|b| dirs[b].map(T::lit)))
            .collect(),
        skinning_weights: weights.map(T::lit),
        parents: PARENTS.to_vec(),
        rest_joint_offsets: offsets,
        joint_regressor: regressor.map(T::lit),
    };
    HandModel::new(parts).expect("procedural mitten satisfies the model contract")
}

/// Dorsal marker vertices, `per_segment` (1..=4) on each of the 16 segments.
///
/// Candidates per segment, in order: the two dorsal corners of the middle
/// ring, then the two dorsal corners of the distal ring. These vertices are
/// fully bound to their own joint.
pub fn dorsal_marker_vertices(per_segment: usize) -> Vec<usize> {
    let per_segment = per_segment.clamp(1, 4);
    let candidates = [RING + 2, RING + 3, 2 * RING + 2, 2 * RING + 3];
    (0..NUM_JOINTS)
        .flat_map(|k| candidates[..per_segment].iter().map(move |c| k * SEG_VERTS + c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::HandParams;

    #[test]
    fn vertex_count_and_rest_joints() {
        let m = mitten_hand::<f64>(false);
        assert_eq!(m.num_vertices(), NUM_VERTICES);
        assert_eq!(m.rest_joints()[0], Point3::origin());
        assert!((m.rest_joints()[1] - Point3::new(0.09, 0.03, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn left_hand_mirrors_right() {
        let r = mitten_hand::<f64>(false);
        let l = mitten_hand::<f64>(true);
        for (a, b) in r.template().vertices.iter().zip(&l.template().vertices) {
            assert_eq!((a.x, -a.y, a.z), (b.x, b.y, b.z));
        }
        let mut p = HandParams::zeros();
        p.theta[3 * 4 + 1] = 0.5;
        let jr = r.posed_joints(&p).unwrap();
        // mirrored pose: flip the x and z components of every axis-angle
        let mut q = p.clone();
        for j in 0..NUM_JOINTS {
            q.theta[3 * j] = -q.theta[3 * j];
            q.theta[3 * j + 2] = -q.theta[3 * j + 2];
        }
        let jl = l.posed_joints(&q).unwrap();
        for (a, b) in jr.iter().zip(&jl) {
            assert!((a.x - b.x).abs() < 1e-12 && (a.y + b.y).abs() < 1e-12 && (a.z - b.z).abs() < 1e-12);
        }
    }

    #[test]
    fn markers_are_dorsal_and_rigidly_bound() {
        let m = mitten_hand::<f64>(false);
        let markers = dorsal_marker_vertices(3);
        assert_eq!(markers.len(), 48);
        for &v in &markers {
            assert!(m.template().vertices[v].z > 0.0);
            let row = m.parts().skinning_weights.row(v);
            assert_eq!(row.iter().filter(|&&w| w == 1.0).count(), 1);
        }
    }
}
