//! Per-instance error metrics. Distances are taken in meters and reported in
//! millimeters; angles are taken in radians and reported in degrees.

use nalgebra::Point3;

use crate::error::{check_len, Error, Result};
use crate::Real;

/// Default PCD thresholds: 1 to 100 mm.
pub fn default_alphas() -> Vec<f64> {
    (1..=100).map(f64::from).collect()
}

fn mm<T: Real>(x: T) -> f64 {
    x.to_f64_lossy() * 1000.0
}

/// Mean root-relative joint error over all joints (root included), mm. Joint 0 is the root.
pub fn mpjpe<T: Real>(pred: &[Point3<T>], gt: &[Point3<T>]) -> Result<f64> {
    check_len("joints", gt.len(), pred.len())?;
    if gt.is_empty() {
        return Err(Error::Dimension {
            what: "joints",
            expected: 1,
            got: 0,
        });
    }
    v2v(pred, gt, &pred[0], &gt[0])
}

/// Error of the predicted offset from root `b` to root `a`, mm.
pub fn mrrpe<T: Real>(a_gt: &Point3<T>, b_gt: &Point3<T>, a_pred: &Point3<T>, b_pred: &Point3<T>) -> f64 {
    mm(((a_gt - b_gt) - (a_pred - b_pred)).norm())
}

/// Absolute articulation error, degrees; no wrap-around.
pub fn aae<T: Real>(pred_omega: T, gt_omega: T) -> f64 {
    (pred_omega - gt_omega).abs().to_f64_lossy().to_degrees()
}

/// Mean over frames of [`aae`].
pub fn mean_aae<T: Real>(pred: &[T], gt: &[T]) -> Result<f64> {
    check_len("articulation frames", gt.len(), pred.len())?;
    if gt.is_empty() {
        return Err(Error::EmptyFrames);
    }
    Ok(pred.iter().zip(gt).map(|(&p, &g)| aae(p, g)).sum::<f64>() / gt.len() as f64)
}

/// Mean root-relative vertex error, mm.
pub fn v2v<T: Real>(pred: &[Point3<T>], gt: &[Point3<T>], pred_root: &Point3<T>, gt_root: &Point3<T>) -> Result<f64> {
    check_len("vertices", gt.len(), pred.len())?;
    if gt.is_empty() {
        return Err(Error::Dimension {
            what: "vertices",
            expected: 1,
            got: 0,
        });
    }
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(p, g)| ((p - pred_root) - (g - gt_root)).norm().to_f64_lossy())
        .sum();
    Ok(sum * 1000.0 / gt.len() as f64)
}

/// Fraction of entries with absolute error strictly below each alpha (mm).
pub fn pcd<T: Real>(pred: &[T], gt: &[T], alphas_mm: &[f64]) -> Result<Vec<(f64, f64)>> {
    let counts = pcd_counts(pred, gt, alphas_mm)?;
    if gt.is_empty() {
        return Err(Error::Dimension {
            what: "field distances",
            expected: 1,
            got: 0,
        });
    }
    Ok(alphas_mm
        .iter()
        .zip(counts)
        .map(|(&a, c)| (a, c as f64 / gt.len() as f64))
        .collect())
}

/// Per-alpha count of entries with error below alpha; the numerator of [`pcd`].
pub fn pcd_counts<T: Real>(pred: &[T], gt: &[T], alphas_mm: &[f64]) -> Result<Vec<usize>> {
    check_len("field distances", gt.len(), pred.len())?;
    let mut errors: Vec<f64> = pred.iter().zip(gt).map(|(&p, &g)| mm((p - g).abs())).collect();
    errors.sort_by(f64::total_cmp);
    Ok(alphas_mm
        .iter()
        .map(|&a| errors.partition_point(|&e| e < a))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    fn joints() -> Vec<Point3<f64>> {
        (0..21).map(|i| Point3::new(i as f64 * 0.01, (i % 3) as f64 * 0.02, 0.1)).collect()
    }

    #[test]
    fn mpjpe_examples() {
        let gt = joints();
        let shifted: Vec<_> = gt.iter().map(|p| p + Vector3::new(0.3, -0.2, 0.1)).collect();
        assert!(mpjpe(&shifted, &gt).unwrap().abs() < 1e-9);
        let mut one = gt.clone();
        one[5].y += 0.005;
        assert!((mpjpe(&one, &gt).unwrap() - 5.0 / 21.0).abs() < 1e-9);
        assert!(mpjpe(&gt[..20], &gt).is_err());
    }

    #[test]
    fn mrrpe_examples() {
        let o = Point3::origin();
        let z = |mm: f64| Point3::new(0.0, 0.0, mm / 1000.0);
        assert_eq!(mrrpe(&z(10.0), &o, &z(10.0), &o), 0.0);
        assert!((mrrpe(&z(10.0), &o, &z(13.0), &o) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn aae_examples() {
        let r = |d: f64| d.to_radians();
        assert_eq!(aae(0.3, 0.3), 0.0);
        assert!((aae(r(30.0), r(45.0)) - 15.0).abs() < 1e-9);
        assert!((mean_aae(&[r(10.0), r(20.0)], &[0.0, 0.0]).unwrap() - 15.0).abs() < 1e-9);
    }

    #[test]
    fn v2v_examples() {
        let gt: Vec<Point3<f64>> = (0..4).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let t = Vector3::new(1.0, 2.0, 3.0);
        let moved: Vec<_> = gt.iter().map(|p| p + t).collect();
        let root = Point3::origin();
        assert!(v2v(&moved, &gt, &(root + t), &root).unwrap().abs() < 1e-9);
        let mut off = gt.clone();
        off[2].z += 0.002;
        assert!((v2v(&off, &gt, &root, &root).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn pcd_examples() {
        let gt = [0.0; 3];
        let pred = [0.001, 0.003, 0.007];
        let c = pcd(&pred, &gt, &[0.0, 5.0, 100.0]).unwrap();
        assert_eq!(c[0].1, 0.0);
        assert!((c[1].1 - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(c[2].1, 1.0);
        let same = pcd(&pred, &pred, &default_alphas()).unwrap();
        assert!(same.iter().all(|&(_, f)| f == 1.0));
        assert_eq!(pcd(&pred, &pred, &[0.0]).unwrap()[0].1, 0.0);
        assert!(pcd(&pred[..2], &gt, &[1.0]).is_err());
    }
}
