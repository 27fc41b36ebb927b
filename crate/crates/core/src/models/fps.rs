//! Farthest point sampling over mesh vertices.

use nalgebra::Point3;

use super::mesh::Mesh;
use crate::error::{Error, Result};
use crate::Real;

/// Greedy max-min selection of `k` vertex indices starting at `start`.
///
/// Each pick maximizes the distance to the already selected set; ties go to
/// the lowest index. Already selected vertices are never picked twice, so
/// `k == vertex count` yields a permutation even with duplicate positions.
pub fn fps_landmarks<T: Real>(mesh: &Mesh<T>, k: usize, start: usize) -> Result<Vec<usize>> {
    fps_points(&mesh.vertices, k, start)
}

pub fn fps_points<T: Real>(points: &[Point3<T>], k: usize, start: usize) -> Result<Vec<usize>> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyMesh);
    }
    if k > n {
        return Err(Error::TooManyLandmarks {
            requested: k,
            available: n,
        });
    }
    if start >= n {
        return Err(Error::Parameter(format!("start vertex {start} out of range")));
    }
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut selected = Vec::with_capacity(k);
    let mut taken = vec![false; n];
    let mut min_sq: Vec<T> = vec![T::max_value().unwrap_or_else(T::one); n];
    let mut current = start;
    loop {
        selected.push(current);
        taken[current] = true;
        if selected.len() == k {
            break;
        }
        let c = points[current];
        let mut best: Option<(usize, T)> = None;
        for i in 0..n {
            let d = (points[i] - c).norm_squared();
            if d < min_sq[i] {
                min_sq[i] = d;
            }
            if !taken[i] && best.is_none_or(|(_, b)| min_sq[i] > b) {
                best = Some((i, min_sq[i]));
            }
        }
        current = best.expect("k <= n leaves an untaken vertex").0;
    }
    Ok(selected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(n: usize) -> Vec<Point3<f64>> {
        (0..n).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect()
    }

    /// Exhaustive greedy: recompute every candidate's distance to the whole selected set.
    fn oracle(points: &[Point3<f64>], k: usize, start: usize) -> Vec<usize> {
        let mut sel = vec![start];
        while sel.len() < k {
            let mut best = (usize::MAX, -1.0);
            for i in 0..points.len() {
                if sel.contains(&i) {
                    continue;
                }
                let d = sel
                    .iter()
                    .map(|&j| (points[i] - points[j]).norm())
                    .fold(f64::INFINITY, f64::min);
                if d > best.1 {
                    best = (i, d);
                }
            }
            sel.push(best.0);
        }
        sel
    }

    #[test]
    fn collinear_three() {
        let pts = line(11);
        assert_eq!(fps_points(&pts, 3, 0).unwrap(), vec![0, 10, 5]);
    }

    #[test]
    fn full_selection_is_permutation() {
        let mut pts = line(6);
        pts.push(Point3::new(2.0, 0.0, 0.0));
        let mut idx = fps_points(&pts, 7, 3).unwrap();
        assert_eq!(idx[0], 3);
        idx.sort();
        assert_eq!(idx, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn errors() {
        let pts = line(4);
        assert!(matches!(
            fps_points(&pts, 5, 0),
            Err(Error::TooManyLandmarks { requested: 5, available: 4 })
        ));
        assert!(fps_points(&pts, 2, 9).is_err());
        assert!(fps_points::<f64>(&[], 0, 0).is_err());
    }

    #[test]
    fn random_cloud_matches_exhaustive_greedy() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Point3<f64>> = (0..200)
            .map(|_| Point3::new(rng.random(), rng.random(), rng.random()))
            .collect();
        assert_eq!(fps_points(&pts, 16, 0).unwrap(), oracle(&pts, 16, 0));
    }

    fn min_pairwise(points: &[Point3<f64>], sel: &[usize]) -> f64 {
        let mut m = f64::INFINITY;
        for a in 0..sel.len() {
            for b in a + 1..sel.len() {
                m = m.min((points[sel[a]] - points[sel[b]]).norm());
            }
        }
        m
    }

    proptest! {
        #[test]
        fn prefixes_and_spread(coords in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0), 2..60), start_frac in 0.0f64..1.0) {
            let pts: Vec<Point3<f64>> = coords.iter().map(|&(x, y, z)| Point3::new(x, y, z)).collect();
            let start = ((pts.len() - 1) as f64 * start_frac) as usize;
            let full = fps_points(&pts, pts.len(), start).unwrap();
            let mut prev = f64::INFINITY;
            for k in 2..=pts.len() {
                let sel = fps_points(&pts, k, start).unwrap();
                prop_assert_eq!(&sel[..], &full[..k]);
                let m = min_pairwise(&pts, &sel);
                prop_assert!(m <= prev);
                prev = m;
            }
        }
    }
}
