//! Procedural two-part articulated objects.

use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{fps_points, ArticulatedObject, Mesh, Part};
use crate::Real;

/// Landmarks sampled on generated objects.
pub const DEFAULT_LANDMARKS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectKind {
    /// Box with a lid hinged along one top edge.
    BoxHinge,
    /// Two plates hinged along their shared edge.
    Flap,
    /// Two stacked blades pivoting about a vertical pin.
    ScissorsLike,
}

/// Closed axis-aligned box with `n` subdivisions per edge, outward-facing triangles.
pub fn subdivided_box(min: [f64; 3], max: [f64; 3], n: usize) -> Mesh<f64> {
    let n = n.max(1);
    let mut index: HashMap<[usize; 3], usize> = HashMap::new();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut vid = |c: [usize; 3], vertices: &mut Vec<Point3<f64>>| -> usize {
        *index.entry(c).or_insert_with(|| {
            let p: [f64; 3] = std::array::from_fn(|a| min[a] + (max[a] - min[a]) * c[a] as f64 / n as f64);
            vertices.push(Point3::from(p));
            vertices.len() - 1
        })
    };
    for a in 0..3 {
        let (b, c) = ((a + 1) % 3, (a + 2) % 3);
        for side in [0, n] {
            for u in 0..n {
                for v in 0..n {
                    let corner = |du: usize, dv: usize| {
                        let mut g = [0usize; 3];
                        g[a] = side;
                        g[b] = u + du;
                        g[c] = v + dv;
                        g
                    };
                    let q = [corner(0, 0), corner(1, 0), corner(1, 1), corner(0, 1)];
                    let ids: Vec<usize> = q.iter().map(|&g| vid(g, &mut vertices)).collect();
                    if side == n {
                        faces.push([ids[0], ids[1], ids[2]]);
                        faces.push([ids[0], ids[2], ids[3]]);
                    } else {
                        faces.push([ids[0], ids[2], ids[1]]);
                        faces.push([ids[0], ids[3], ids[2]]);
                    }
                }
            }
        }
    }
    Mesh { vertices, faces }
}

/// Generates an object of `kind` with `resolution` (>= 1) subdivisions per box edge.
/// The canonical pose has articulation 0 and the landmarks are farthest-point
/// samples over base-then-top vertices seeded at vertex 0.
pub fn generate_object_asset<T: Real>(kind: ObjectKind, resolution: usize) -> Result<ArticulatedObject<T>> {
    if resolution == 0 {
        return Err(Error::Config("object resolution must be at least 1".into()));
    }
    let n = resolution;
    let (base, top, origin, dir) = match kind {
        ObjectKind::BoxHinge => (
            subdivided_box([-0.08, -0.05, 0.0], [0.08, 0.05, 0.06], n),
            subdivided_box([-0.08, -0.05, 0.06], [0.08, 0.05, 0.075], n),
            [-0.08, 0.0, 0.06],
            [0.0, -1.0, 0.0],
        ),
        ObjectKind::Flap => (
            subdivided_box([-0.1, -0.06, 0.0], [0.0, 0.06, 0.01], n),
            subdivided_box([0.0, -0.06, 0.0], [0.1, 0.06, 0.01], n),
            [0.0, 0.0, 0.01],
            [0.0, -1.0, 0.0],
        ),
        ObjectKind::ScissorsLike => (
            subdivided_box([-0.1, -0.01, 0.0], [0.1, 0.01, 0.005], n),
            subdivided_box([-0.1, -0.01, 0.005], [0.1, 0.01, 0.01], n),
            [0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
        ),
    };
    let combined = Mesh::concat(&[&base, &top]);
    let k = DEFAULT_LANDMARKS.min(combined.len());
    let landmarks = fps_points(&combined.vertices, k, 0)?
        .into_iter()
        .map(|i| {
            if i < base.len() {
                (Part::Base, i)
            } else {
                (Part::Top, i - base.len())
            }
        })
        .collect();
    ArticulatedObject::new(
        base.cast(),
        top.cast(),
        Point3::new(T::lit(origin[0]), T::lit(origin[1]), T::lit(origin[2])),
        Vector3::new(T::lit(dir[0]), T::lit(dir[1]), T::lit(dir[2])),
        T::zero(),
        landmarks,
    )
}

/// Spread-out marker vertices on one part (farthest point sampling from vertex 0).
pub fn object_marker_vertices<T: Real>(object: &ArticulatedObject<T>, part: Part, count: usize) -> Result<Vec<usize>> {
    let mesh = object.part(part);
    fps_points(&mesh.vertices, count.min(mesh.len()), 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ObjectPose;

    const KINDS: [ObjectKind; 3] = [ObjectKind::BoxHinge, ObjectKind::Flap, ObjectKind::ScissorsLike];

    #[test]
    fn boxes_are_watertight() {
        for n in 1..5 {
            let b = subdivided_box([0.0; 3], [1.0, 2.0, 3.0], n);
            assert_eq!(b.len(), 6 * n * n + 2);
            assert!(b.is_watertight());
            b.validate().unwrap();
        }
    }

    #[test]
    fn generated_assets_are_valid() {
        for kind in KINDS {
            for res in [1, 3, 6] {
                let obj = generate_object_asset::<f64>(kind, res).unwrap();
                assert!((obj.axis_direction.norm() - 1.0).abs() < 1e-12);
                assert!(obj.base.is_watertight() && obj.top.is_watertight());
                assert_eq!(obj.rest_angle, 0.0);
            }
        }
        assert!(generate_object_asset::<f64>(ObjectKind::Flap, 0).is_err());
    }

    #[test]
    fn articulation_keeps_top_rigid() {
        for kind in KINDS {
            let obj = generate_object_asset::<f64>(kind, 3).unwrap();
            let (_, top) = obj.pose(&ObjectPose::rest(std::f64::consts::FRAC_PI_4)).unwrap();
            for i in (0..top.len()).step_by(7) {
                for j in (0..top.len()).step_by(5) {
                    let before = (obj.top.vertices[i] - obj.top.vertices[j]).norm();
                    let after = (top.vertices[i] - top.vertices[j]).norm();
                    assert!((before - after).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn landmarks_match_exhaustive_greedy() {
        let obj = generate_object_asset::<f64>(ObjectKind::BoxHinge, 4).unwrap();
        let all = Mesh::concat(&[&obj.base, &obj.top]);
        let mut sel: Vec<usize> = vec![0];
        while sel.len() < DEFAULT_LANDMARKS {
            let mut best = (0, -1.0);
            for i in 0..all.len() {
                if sel.contains(&i) {
                    continue;
                }
                let d = sel
                    .iter()
                    .map(|&j| (all.vertices[i] - all.vertices[j]).norm_squared())
                    .fold(f64::INFINITY, f64::min);
                if d > best.1 {
                    best = (i, d);
                }
            }
            sel.push(best.0);
        }
        let got: Vec<usize> = obj
            .landmarks
            .iter()
            .map(|&(p, i)| if p == Part::Base { i } else { i + obj.base.len() })
            .collect();
        assert_eq!(got, sel);
    }
}
