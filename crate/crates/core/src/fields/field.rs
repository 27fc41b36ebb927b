//! Clamped nearest-vertex distance fields between meshes.

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::kdtree::{dist2, KdTree};
use crate::error::{Error, Result};
use crate::models::Mesh;
use crate::Real;

/// Distance clamp, meters.
pub const DEFAULT_D_MAX: f64 = 0.100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Entity {
    LeftHand,
    RightHand,
    Object,
}

impl Entity {
    pub fn short(self) -> &'static str {
        match self {
            Entity::LeftHand => "l",
            Entity::RightHand => "r",
            Entity::Object => "o",
        }
    }
}

/// What a source vertex is measured against.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    /// Nearest target vertex.
    #[default]
    Vertex,
    /// Nearest point on any target triangle (brute force).
    Surface,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InteractionField<T: Real> {
    pub source: Entity,
    pub target: Entity,
    pub d_max: T,
    /// One entry per source vertex, each in `[0, d_max]`.
    pub distances: Vec<T>,
}

impl<T: Real> InteractionField<T> {
    pub fn new(source: Entity, target: Entity, d_max: T, distances: Vec<T>) -> Result<Self> {
        check_d_max(d_max)?;
        if let Some(i) = distances.iter().position(|&d| !(d >= T::zero() && d <= d_max)) {
            return Err(Error::Parameter(format!(
                "field distance {} at vertex {i} outside [0, {}]",
                distances[i], d_max
            )));
        }
        Ok(Self {
            source,
            target,
            d_max,
            distances,
        })
    }

    /// Field from `source_mesh` to `target_mesh` with the fast exact query.
    pub fn compute(source: Entity, source_mesh: &Mesh<T>, target: Entity, target_mesh: &Mesh<T>, d_max: T) -> Result<Self> {
        Ok(Self {
            source,
            target,
            d_max,
            distances: field_fast(source_mesh, target_mesh, d_max)?,
        })
    }

    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    pub fn name(&self) -> String {
        format!("{}2{}", self.source.short(), self.target.short())
    }
}

fn check_d_max<T: Real>(d_max: T) -> Result<()> {
    if !(d_max > T::zero()) || !d_max.is_finite() {
        return Err(Error::Parameter(format!("d_max must be positive and finite, got {d_max}")));
    }
    Ok(())
}

fn check_meshes<T: Real>(source: &Mesh<T>, target: &Mesh<T>, d_max: T) -> Result<()> {
    if source.is_empty() || target.is_empty() {
        return Err(Error::EmptyMesh);
    }
    check_d_max(d_max)
}

/// Reference implementation: every source vertex against every target vertex.
pub fn field_bruteforce<T: Real>(source: &Mesh<T>, target: &Mesh<T>, d_max: T) -> Result<Vec<T>> {
    check_meshes(source, target, d_max)?;
    Ok(source
        .vertices
        .iter()
        .map(|p| {
            let best = target
                .vertices
                .iter()
                .map(|q| dist2(p, q))
                .fold(None, |acc: Option<T>, d| Some(acc.map_or(d, |a| a.min(d))))
                .expect("target is non-empty");
            best.sqrt().min(d_max)
        })
        .collect())
}

/// Same values as [`field_bruteforce`], using a k-d tree over the target with
/// the search radius capped at `d_max`.
pub fn field_fast<T: Real>(source: &Mesh<T>, target: &Mesh<T>, d_max: T) -> Result<Vec<T>> {
    check_meshes(source, target, d_max)?;
    let tree = KdTree::new(&target.vertices);
    // Slightly above d_max² so a neighbor whose rounded root equals d_max is still found.
    let bound = d_max * d_max * (T::one() + T::lit(4.0) * T::default_epsilon());
    Ok(tree
        .nearest_dist2_within_all(&source.vertices, bound)
        .into_iter()
        .map(|d| d.map_or(d_max, |d| d.sqrt().min(d_max)))
        .collect())
}

/// Field under the chosen metric; the surface metric requires target faces.
pub fn field_with_metric<T: Real>(source: &Mesh<T>, target: &Mesh<T>, d_max: T, metric: DistanceMetric) -> Result<Vec<T>> {
    match metric {
        DistanceMetric::Vertex => field_fast(source, target, d_max),
        DistanceMetric::Surface => {
            check_meshes(source, target, d_max)?;
            if target.faces.is_empty() {
                return Err(Error::InvalidMesh("surface distance needs target faces".into()));
            }
            Ok(source
                .vertices
                .iter()
                .map(|p| {
                    target
                        .faces
                        .iter()
                        .map(|f| {
                            let c = closest_on_triangle(p, &target.vertices[f[0]], &target.vertices[f[1]], &target.vertices[f[2]]);
                            dist2(p, &c)
                        })
                        .fold(T::max_value().unwrap_or(d_max), |a, d| a.min(d))
                        .sqrt()
                        .min(d_max)
                })
                .collect())
        }
    }
}

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
fn closest_on_triangle<T: Real>(p: &Point3<T>, a: &Point3<T>, b: &Point3<T>, c: &Point3<T>) -> Point3<T> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= T::zero() && d2 <= T::zero() {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= T::zero() && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= T::zero() && d1 >= T::zero() && d3 <= T::zero() {
        return a + ab * (d1 / (d1 - d3));
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= T::zero() && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= T::zero() && d2 >= T::zero() && d6 <= T::zero() {
        return a + ac * (d2 / (d2 - d6));
    }
    let va = d3 * d6 - d5 * d4;
    if va <= T::zero() && (d4 - d3) >= T::zero() && (d5 - d6) >= T::zero() {
        return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
    }
    let denom = T::one() / (va + vb + vc);
    a + ab * (vb * denom) + ac * (vc * denom)
}

/// The four fields between two hands and an object.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSet<T: Real> {
    pub left_to_object: InteractionField<T>,
    pub right_to_object: InteractionField<T>,
    pub object_to_left: InteractionField<T>,
    pub object_to_right: InteractionField<T>,
}

impl<T: Real> FieldSet<T> {
    pub fn fields(&self) -> [&InteractionField<T>; 4] {
        [
            &self.left_to_object,
            &self.right_to_object,
            &self.object_to_left,
            &self.object_to_right,
        ]
    }
}

/// Ground-truth fields for one frame; the object is measured against each hand separately.
pub fn extract_gt_fields<T: Real>(left: &Mesh<T>, right: &Mesh<T>, object: &Mesh<T>, d_max: T) -> Result<FieldSet<T>> {
    use Entity::*;
    Ok(FieldSet {
        left_to_object: InteractionField::compute(LeftHand, left, Object, object, d_max)?,
        right_to_object: InteractionField::compute(RightHand, right, Object, object, d_max)?,
        object_to_left: InteractionField::compute(Object, object, LeftHand, left, d_max)?,
        object_to_right: InteractionField::compute(Object, object, RightHand, right, d_max)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::isometry;
    use nalgebra::Vector3;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn point(x: f64) -> Mesh<f64> {
        Mesh::from_points(vec![Point3::new(x, 0.0, 0.0)]).unwrap()
    }

    fn cloud(rng: &mut ChaCha8Rng, n: usize, spread: f64) -> Mesh<f64> {
        Mesh::from_points(
            (0..n)
                .map(|_| Point3::new(rng.random_range(-spread..spread), rng.random_range(-spread..spread), rng.random_range(-spread..spread)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn identical_meshes_are_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let m = cloud(&mut rng, 40, 0.1);
        assert!(field_bruteforce(&m, &m, 0.1).unwrap().iter().all(|&d| d == 0.0));
        assert!(field_fast(&m, &m, 0.1).unwrap().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn single_vertices() {
        let (a, b, c) = (point(0.0), point(0.05), point(0.25));
        assert!((field_bruteforce(&a, &b, 0.1).unwrap()[0] - 0.05).abs() < 1e-15);
        assert!((field_fast(&b, &a, 0.1).unwrap()[0] - 0.05).abs() < 1e-15);
        assert_eq!(field_bruteforce(&a, &c, 0.1).unwrap(), vec![0.1]);
        assert_eq!(field_fast(&c, &a, 0.1).unwrap(), vec![0.1]);
    }

    #[test]
    fn errors() {
        let empty = Mesh::<f64> {
            vertices: vec![],
            faces: vec![],
        };
        assert!(matches!(field_fast(&empty, &point(0.0), 0.1), Err(Error::EmptyMesh)));
        assert!(matches!(field_bruteforce(&point(0.0), &empty, 0.1), Err(Error::EmptyMesh)));
        assert!(field_fast(&point(0.0), &point(1.0), 0.0).is_err());
        assert!(InteractionField::new(Entity::Object, Entity::LeftHand, 0.1, vec![0.2]).is_err());
    }

    #[test]
    fn fast_matches_bruteforce_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..40 {
            let na = rng.random_range(50..500);
            let nb = rng.random_range(1..500);
            let a = cloud(&mut rng, na, 0.1);
            let b = cloud(&mut rng, nb, 0.15);
            assert_eq!(field_fast(&a, &b, 0.1).unwrap(), field_bruteforce(&a, &b, 0.1).unwrap());
        }
    }

    #[test]
    fn boundary_distance_is_not_lost_to_pruning() {
        // Neighbor at exactly d_max in several directions.
        let a = point(0.0);
        for x in [0.1, -0.1, 0.1 + 1e-17] {
            let b = Mesh::from_points(vec![Point3::new(x, 0.0, 0.0), Point3::new(0.0, 0.3, 0.0)]).unwrap();
            assert_eq!(field_fast(&a, &b, 0.1).unwrap(), field_bruteforce(&a, &b, 0.1).unwrap());
        }
    }

    #[test]
    fn gt_fields_far_apart_are_clamped() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = cloud(&mut rng, 30, 0.02);
        let r = l.transformed(&isometry(&Vector3::zeros(), &Vector3::new(1.0, 0.0, 0.0)));
        let o = l.transformed(&isometry(&Vector3::zeros(), &Vector3::new(0.0, 1.0, 0.0)));
        let set = extract_gt_fields(&l, &r, &o, 0.1).unwrap();
        for f in set.fields() {
            assert!(f.distances.iter().all(|&d| d == 0.1));
        }
        let set = extract_gt_fields(&o, &r, &o, 0.1).unwrap();
        assert!(set.left_to_object.distances.iter().all(|&d| d == 0.0));
        assert_eq!(set.object_to_right.source, Entity::Object);
        assert_eq!(set.object_to_right.target, Entity::RightHand);
        assert_eq!(set.object_to_right.name(), "o2r");
    }

    #[test]
    fn surface_metric_never_exceeds_vertex_metric() {
        let obj = crate::synth::subdivided_box([0.0; 3], [0.1; 3], 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let probe = cloud(&mut rng, 60, 0.2);
        let v = field_with_metric(&probe, &obj, 0.1, DistanceMetric::Vertex).unwrap();
        let s = field_with_metric(&probe, &obj, 0.1, DistanceMetric::Surface).unwrap();
        for (a, b) in v.iter().zip(&s) {
            assert!(b <= a);
        }
        let on_face = Mesh::from_points(vec![Point3::new(0.05, 0.05, 0.1)]).unwrap();
        let s = field_with_metric(&on_face, &obj, 0.1, DistanceMetric::Surface).unwrap();
        assert!(s[0] < 1e-12);
        assert!(field_with_metric(&probe, &point(0.0), 0.1, DistanceMetric::Surface).is_err());
    }

    #[test]
    fn f32_fast_matches_bruteforce() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = cloud(&mut rng, 200, 0.1).cast::<f32>();
        let b = cloud(&mut rng, 300, 0.1).cast::<f32>();
        assert_eq!(field_fast(&a, &b, 0.1f32).unwrap(), field_bruteforce(&a, &b, 0.1f32).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn symmetric_minimum_and_rigid_invariance(seed in 0u64..10_000, aa in prop::array::uniform3(-3.0f64..3.0), t in prop::array::uniform3(-1.0f64..1.0)) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = cloud(&mut rng, 60, 0.05);
            let b = cloud(&mut rng, 80, 0.05);
            let ab = field_fast(&a, &b, 0.1).unwrap();
            let ba = field_fast(&b, &a, 0.1).unwrap();
            let min_ab = ab.iter().cloned().fold(f64::INFINITY, f64::min);
            let min_ba = ba.iter().cloned().fold(f64::INFINITY, f64::min);
            if min_ab < 0.1 {
                prop_assert_eq!(min_ab, min_ba);
            }
            let iso = isometry(&Vector3::from(aa), &Vector3::from(t));
            let moved = field_fast(&a.transformed(&iso), &b.transformed(&iso), 0.1).unwrap();
            for (x, y) in ab.iter().zip(&moved) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
