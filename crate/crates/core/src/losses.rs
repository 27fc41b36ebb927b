//! Reference training objectives: hand and object supervision terms and the
//! interaction-field L1 loss. Every term is computed in `f64`.

use nalgebra::{Point2, Point3};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::fields::FieldSet;
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HandLossWeights {
    pub joints3d: f64,
    pub joints2d: f64,
    pub theta: f64,
    pub beta: f64,
    pub cam: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ObjectLossWeights {
    pub landmarks3d: f64,
    pub landmarks2d: f64,
    pub omega: f64,
    pub rot: f64,
    pub cam: f64,
}

impl Default for HandLossWeights {
    fn default() -> Self {
        Self {
            joints3d: 1.0,
            joints2d: 1.0,
            theta: 1.0,
            beta: 1.0,
            cam: 1.0,
        }
    }
}

impl Default for ObjectLossWeights {
    fn default() -> Self {
        Self {
            landmarks3d: 1.0,
            landmarks2d: 1.0,
            omega: 1.0,
            rot: 1.0,
            cam: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossWeights {
    pub left: HandLossWeights,
    pub right: HandLossWeights,
    pub object: ObjectLossWeights,
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.iter().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Parameter("loss weights must be finite and non-negative".into()));
    }
    Ok(())
}

impl HandLossWeights {
    pub fn validate(&self) -> Result<()> {
        check_weights(&[self.joints3d, self.joints2d, self.theta, self.beta, self.cam])
    }
}

impl ObjectLossWeights {
    pub fn validate(&self) -> Result<()> {
        check_weights(&[self.landmarks3d, self.landmarks2d, self.omega, self.rot, self.cam])
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        self.left.validate()?;
        self.right.validate()?;
        self.object.validate()
    }
}

/// Network outputs (or labels) for one hand.
#[derive(Debug, Clone, PartialEq)]
pub struct HandTargets<T: Real> {
    /// 21 joints; roots are subtracted before comparison.
    pub joints3d: Vec<Point3<T>>,
    /// Projected joints, pixels.
    pub joints2d: Vec<Point2<T>>,
    pub theta: Vec<T>,
    pub beta: Vec<T>,
    /// Weak-perspective `(s, t_x, t_y)`.
    pub cam: [T; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectTargets<T: Real> {
    pub landmarks3d: Vec<Point3<T>>,
    pub landmarks2d: Vec<Point2<T>>,
    pub omega: T,
    /// Axis-angle global rotation.
    pub rot: [T; 3],
    pub cam: [T; 3],
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct HandLoss {
    pub joints3d: f64,
    pub joints2d: f64,
    pub theta: f64,
    pub beta: f64,
    pub cam: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectLoss {
    pub landmarks3d: f64,
    pub landmarks2d: f64,
    pub omega: f64,
    pub rot: f64,
    pub cam: f64,
    pub total: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct FieldLoss {
    pub l2o: f64,
    pub r2o: f64,
    pub o2l: f64,
    pub o2r: f64,
    pub total: f64,
}

/// Mean of squared differences; zero for empty input.
fn mse<T: Real>(what: &'static str, a: impl ExactSizeIterator<Item = T>, b: impl ExactSizeIterator<Item = T>) -> Result<f64> {
    check_len(what, b.len(), a.len())?;
    let n = a.len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = a
        .zip(b)
        .map(|(x, y)| {
            let d = (x - y).to_f64_lossy();
            d * d
        })
        .sum();
    Ok(sum / n as f64)
}

fn flat3<T: Real>(p: &[Point3<T>], root: Option<Point3<T>>) -> Vec<T> {
    let o = root.map_or_else(nalgebra::Vector3::zeros, |r| r.coords);
    p.iter().flat_map(|q| (q.coords - o).iter().copied().collect::<Vec<_>>()).collect()
}

fn flat2<T: Real>(p: &[Point2<T>]) -> Vec<T> {
    p.iter().flat_map(|q| [q.x, q.y]).collect()
}

pub fn hand_loss<T: Real>(pred: &HandTargets<T>, gt: &HandTargets<T>, w: &HandLossWeights) -> Result<HandLoss> {
    w.validate()?;
    check_len("hand joints", gt.joints3d.len(), pred.joints3d.len())?;
    let a = flat3(&pred.joints3d, pred.joints3d.first().copied());
    let b = flat3(&gt.joints3d, gt.joints3d.first().copied());
    let joints3d = mse("hand joints", a.into_iter(), b.into_iter())?;
    let joints2d = mse("hand 2d joints", flat2(&pred.joints2d).into_iter(), flat2(&gt.joints2d).into_iter())?;
    let theta = mse("theta", pred.theta.iter().copied(), gt.theta.iter().copied())?;
    let beta = mse("beta", pred.beta.iter().copied(), gt.beta.iter().copied())?;
    let cam = mse("camera", pred.cam.into_iter(), gt.cam.into_iter())?;
    Ok(HandLoss {
        joints3d,
        joints2d,
        theta,
        beta,
        cam,
        total: w.joints3d * joints3d + w.joints2d * joints2d + w.theta * theta + w.beta * beta + w.cam * cam,
    })
}

pub fn object_loss<T: Real>(pred: &ObjectTargets<T>, gt: &ObjectTargets<T>, w: &ObjectLossWeights) -> Result<ObjectLoss> {
    w.validate()?;
    let landmarks3d = mse(
        "object landmarks",
        flat3(&pred.landmarks3d, None).into_iter(),
        flat3(&gt.landmarks3d, None).into_iter(),
    )?;
    let landmarks2d = mse(
        "object 2d landmarks",
        flat2(&pred.landmarks2d).into_iter(),
        flat2(&gt.landmarks2d).into_iter(),
    )?;
    let omega = mse("omega", std::iter::once(pred.omega), std::iter::once(gt.omega))?;
    let rot = mse("rotation", pred.rot.into_iter(), gt.rot.into_iter())?;
    let cam = mse("camera", pred.cam.into_iter(), gt.cam.into_iter())?;
    Ok(ObjectLoss {
        landmarks3d,
        landmarks2d,
        omega,
        rot,
        cam,
        total: w.landmarks3d * landmarks3d + w.landmarks2d * landmarks2d + w.omega * omega + w.rot * rot + w.cam * cam,
    })
}

/// Sum of absolute differences per field. `mean` divides each term by its
/// vertex count instead.
pub fn field_loss<T: Real>(pred: &FieldSet<T>, gt: &FieldSet<T>, mean: bool) -> Result<FieldLoss> {
    let mut terms = [0.0; 4];
    for (k, (p, g)) in pred.fields().iter().zip(gt.fields()).enumerate() {
        check_len("field distances", g.len(), p.len())?;
        let sum: f64 = p
            .distances
            .iter()
            .zip(&g.distances)
            .map(|(&a, &b)| (a - b).abs().to_f64_lossy())
            .sum();
        terms[k] = if mean && !g.is_empty() { sum / g.len() as f64 } else { sum };
    }
    Ok(FieldLoss {
        l2o: terms[0],
        r2o: terms[1],
        o2l: terms[2],
        o2r: terms[3],
        total: terms.iter().sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hand() -> HandTargets<f64> {
        HandTargets {
            joints3d: (0..21).map(|i| Point3::new(i as f64 * 0.01, 0.02, -0.01)).collect(),
            joints2d: (0..21).map(|i| Point2::new(i as f64, 2.0 * i as f64)).collect(),
            theta: vec![0.1; 48],
            beta: vec![0.0; 10],
            cam: [1.0, 0.1, -0.1],
        }
    }

    fn object() -> ObjectTargets<f64> {
        ObjectTargets {
            landmarks3d: (0..16).map(|i| Point3::new(0.0, i as f64 * 0.01, 0.0)).collect(),
            landmarks2d: (0..16).map(|i| Point2::new(i as f64, 1.0)).collect(),
            omega: 0.3,
            rot: [0.1, 0.2, 0.3],
            cam: [1.0, 0.0, 0.0],
        }
    }

    #[test]
    fn equal_inputs_are_zero() {
        let l = hand_loss(&hand(), &hand(), &HandLossWeights::default()).unwrap();
        assert_eq!(l, HandLoss::default());
        let o = object_loss(&object(), &object(), &ObjectLossWeights::default()).unwrap();
        assert_eq!(o, ObjectLoss::default());
    }

    #[test]
    fn beta_unit_offset() {
        let mut p = hand();
        p.beta[0] = 1.0;
        let w = HandLossWeights {
            joints3d: 0.0,
            joints2d: 0.0,
            theta: 0.0,
            beta: 1.0,
            cam: 0.0,
        };
        assert!((hand_loss(&p, &hand(), &w).unwrap().total - 0.1).abs() < 1e-15);
    }

    #[test]
    fn omega_offset() {
        let mut p = object();
        p.omega += 0.2;
        let w = ObjectLossWeights {
            landmarks3d: 0.0,
            landmarks2d: 0.0,
            omega: 1.0,
            rot: 0.0,
            cam: 0.0,
        };
        assert!((object_loss(&p, &object(), &w).unwrap().total - 0.04).abs() < 1e-12);
    }

    #[test]
    fn joints_translation_invariant() {
        let mut p = hand();
        p.joints3d.iter_mut().for_each(|j| j.x += 0.5);
        assert!(hand_loss(&p, &hand(), &HandLossWeights::default()).unwrap().joints3d < 1e-30);
    }

    #[test]
    fn shape_and_weight_errors() {
        let mut p = hand();
        p.theta.pop();
        assert!(hand_loss(&p, &hand(), &HandLossWeights::default()).is_err());
        let w = HandLossWeights {
            cam: -1.0,
            ..Default::default()
        };
        assert!(hand_loss(&hand(), &hand(), &w).is_err());
        let mut o = object();
        o.landmarks3d.pop();
        assert!(object_loss(&o, &object(), &ObjectLossWeights::default()).is_err());
    }

    #[test]
    fn breakdown_serializes() {
        let v = serde_json::to_value(HandLoss::default()).unwrap();
        assert!(v.get("joints3d").is_some() && v.get("total").is_some());
        let w: LossWeights = serde_json::from_str(r#"{"left": {"beta": 2.0}}"#).unwrap();
        assert_eq!(w.left.beta, 2.0);
        assert_eq!(w.left.theta, 1.0);
    }
}
