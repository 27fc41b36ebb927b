//! Marker-driven hand pose fitting.

use nalgebra::{DMatrix, DVector, Point3, Vector3};

use super::lm::{levenberg_marquardt, LeastSquaresProblem, SolverSettings};
use super::rigid::solve_rigid;
use crate::error::{Error, Result};
use crate::models::hand::{NUM_SHAPE, POSE_DIM};
use crate::models::{HandModel, HandParams};
use crate::Real;

/// Fewest visible markers accepted for a hand fit.
pub const MIN_HAND_MARKERS: usize = 4;
const FREE_DIM: usize = POSE_DIM + 3;

#[derive(Debug, Clone)]
pub struct HandFit<T: Real> {
    pub params: HandParams<T>,
    /// RMS over residual components, meters.
    pub rms_residual: T,
    pub iterations: usize,
    pub accepted_steps: usize,
    pub converged: bool,
    pub residual_trace: Vec<T>,
}

struct PoseProblem<'a, T: Real> {
    model: &'a HandModel<T>,
    beta: &'a [T],
    vertices: Vec<usize>,
    targets: Vec<Point3<T>>,
}

fn unpack<T: Real>(x: &[T], beta: &[T]) -> HandParams<T> {
    HandParams {
        theta: x[..POSE_DIM].to_vec(),
        beta: beta.to_vec(),
        translation: Vector3::new(x[POSE_DIM], x[POSE_DIM + 1], x[POSE_DIM + 2]),
    }
}

fn pack<T: Real>(p: &HandParams<T>) -> DVector<T> {
    DVector::from_iterator(FREE_DIM, p.theta.iter().copied().chain(p.translation.iter().copied()))
}

fn marker_residuals<T: Real>(
    model: &HandModel<T>,
    params: &HandParams<T>,
    vertices: &[usize],
    targets: &[Point3<T>],
    out: &mut [T],
) {
    let posed = model
        .pose_vertices(params, vertices)
        .expect("indices validated before solving");
    for (i, (p, t)) in posed.iter().zip(targets).enumerate() {
        let d = p - t;
        out[3 * i] = d.x;
        out[3 * i + 1] = d.y;
        out[3 * i + 2] = d.z;
    }
}

impl<T: Real> LeastSquaresProblem<T> for PoseProblem<'_, T> {
    fn residuals(&self, x: &DVector<T>) -> DVector<T> {
        let mut r = DVector::zeros(3 * self.targets.len());
        marker_residuals(self.model, &unpack(x.as_slice(), self.beta), &self.vertices, &self.targets, r.as_mut_slice());
        r
    }
}

fn check_observations<T: Real>(model: &HandModel<T>, obs: &[(usize, Point3<T>)]) -> Result<()> {
    if obs.len() < MIN_HAND_MARKERS {
        return Err(Error::TooFewMarkers {
            needed: MIN_HAND_MARKERS,
            got: obs.len(),
        });
    }
    if let Some((v, _)) = obs.iter().find(|(v, _)| *v >= model.num_vertices()) {
        return Err(Error::Parameter(format!("marker vertex {v} out of range")));
    }
    Ok(())
}

/// Levenberg–Marquardt over pose and translation with the shape held at `init.beta`.
///
/// `observations` pairs model vertex indices with observed marker positions.
/// Hitting the iteration cap is reported through `converged`, not as an error.
pub fn fit_hand<T: Real>(
    model: &HandModel<T>,
    observations: &[(usize, Point3<T>)],
    init: &HandParams<T>,
    settings: &SolverSettings<T>,
) -> Result<HandFit<T>> {
    check_observations(model, observations)?;
    init.validate()?;
    settings.validate()?;
    let problem = PoseProblem {
        model,
        beta: &init.beta,
        vertices: observations.iter().map(|o| o.0).collect(),
        targets: observations.iter().map(|o| o.1).collect(),
    };
    let report = levenberg_marquardt(&problem, pack(init), settings);
    Ok(HandFit {
        params: unpack(report.params.as_slice(), &init.beta),
        rms_residual: report.rms_residual,
        iterations: report.iterations,
        accepted_steps: report.accepted_steps,
        converged: report.converged,
        residual_trace: report.residual_trace,
    })
}

/// Rest-pose initialization: global rotation and translation from a rigid
/// alignment of the observed markers to the zero-pose model, fingers at rest.
pub fn rigid_initialization<T: Real>(
    model: &HandModel<T>,
    observations: &[(usize, Point3<T>)],
    beta: &[T],
) -> Result<HandParams<T>> {
    check_observations(model, observations)?;
    let mut params = HandParams::zeros();
    params.beta = beta.to_vec();
    let idx: Vec<usize> = observations.iter().map(|o| o.0).collect();
    let rest = model.pose_vertices(&params, &idx)?;
    let targets: Vec<Point3<T>> = observations.iter().map(|o| o.1).collect();
    let fit = solve_rigid(&rest, &targets, None)?;
    let root = model.skeleton(&params)?.positions[0].coords;
    params.set_joint_axis_angle(0, &fit.axis_angle());
    params.translation = fit.translation + fit.rotation * root - root;
    Ok(params)
}

#[derive(Debug, Clone)]
pub struct ShapeCalibration<T: Real> {
    pub beta: Vec<T>,
    pub frames: Vec<HandParams<T>>,
    pub rms_residual: T,
    pub converged: bool,
}

struct ShapeProblem<'a, T: Real> {
    model: &'a HandModel<T>,
    frames: Vec<(Vec<usize>, Vec<Point3<T>>)>,
    offsets: Vec<usize>,
    rows: usize,
}

impl<T: Real> ShapeProblem<'_, T> {
    fn frame_params(&self, x: &DVector<T>, f: usize) -> HandParams<T> {
        let start = NUM_SHAPE + f * FREE_DIM;
        unpack(&x.as_slice()[start..start + FREE_DIM], &x.as_slice()[..NUM_SHAPE])
    }

    fn frame_residuals(&self, x: &DVector<T>, f: usize, out: &mut [T]) {
        let (v, t) = &self.frames[f];
        marker_residuals(self.model, &self.frame_params(x, f), v, t, out);
    }
}

impl<T: Real> LeastSquaresProblem<T> for ShapeProblem<'_, T> {
    fn residuals(&self, x: &DVector<T>) -> DVector<T> {
        let mut r = DVector::zeros(self.rows);
        for f in 0..self.frames.len() {
            let (a, b) = (self.offsets[f], self.offsets[f + 1]);
            self.frame_residuals(x, f, &mut r.as_mut_slice()[a..b]);
        }
        r
    }

    /// Block-sparse central differences: frame parameters only touch their own rows.
    fn jacobian(&self, x: &DVector<T>, step: T) -> DMatrix<T> {
        let mut jac = DMatrix::zeros(self.rows, x.len());
        let mut xp = x.clone();
        let two_h = step + step;
        let mut plus = vec![T::zero(); self.rows];
        let mut minus = vec![T::zero(); self.rows];
        for j in 0..x.len() {
            let frames: Vec<usize> = if j < NUM_SHAPE {
                (0..self.frames.len()).collect()
            } else {
                vec![(j - NUM_SHAPE) / FREE_DIM]
            };
            let orig = xp[j];
            for f in frames {
                let (a, b) = (self.offsets[f], self.offsets[f + 1]);
                xp[j] = orig + step;
                self.frame_residuals(&xp, f, &mut plus[a..b]);
                xp[j] = orig - step;
                self.frame_residuals(&xp, f, &mut minus[a..b]);
                for r in a..b {
                    jac[(r, j)] = (plus[r] - minus[r]) / two_h;
                }
            }
            xp[j] = orig;
        }
        jac
    }
}

/// Per-subject shape calibration: one shared `beta` plus per-frame pose and
/// translation, fitted jointly to several marker frames.
pub fn calibrate_shape<T: Real>(
    model: &HandModel<T>,
    frames: &[Vec<(usize, Point3<T>)>],
    inits: &[HandParams<T>],
    settings: &SolverSettings<T>,
) -> Result<ShapeCalibration<T>> {
    if frames.is_empty() {
        return Err(Error::EmptySequence);
    }
    crate::error::check_len("initial frames", frames.len(), inits.len())?;
    settings.validate()?;
    for obs in frames {
        check_observations(model, obs)?;
    }
    let mut offsets = vec![0];
    for obs in frames {
        offsets.push(offsets.last().unwrap() + 3 * obs.len());
    }
    let problem = ShapeProblem {
        model,
        frames: frames
            .iter()
            .map(|o| (o.iter().map(|p| p.0).collect(), o.iter().map(|p| p.1).collect()))
            .collect(),
        rows: *offsets.last().unwrap(),
        offsets,
    };
    let mut x0 = Vec::with_capacity(NUM_SHAPE + frames.len() * FREE_DIM);
    inits[0].validate()?;
    x0.extend_from_slice(&inits[0].beta);
    for p in inits {
        p.validate()?;
        x0.extend(pack(p).iter());
    }
    let report = levenberg_marquardt(&problem, DVector::from_vec(x0), settings);
    Ok(ShapeCalibration {
        beta: report.params.as_slice()[..NUM_SHAPE].to_vec(),
        frames: (0..frames.len()).map(|f| problem.frame_params(&report.params, f)).collect(),
        rms_residual: report.rms_residual,
        converged: report.converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::hand::{dorsal_marker_vertices, mitten_hand};
    use rand::{Rng, SeedableRng};

    fn truth(seed: u64) -> HandParams<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut p = HandParams::zeros();
        for v in p.theta.iter_mut() {
            *v = rng.random_range(-0.4..0.4);
        }
        p.translation = Vector3::new(0.1, -0.05, 0.3);
        p
    }

    fn observe(model: &HandModel<f64>, p: &HandParams<f64>) -> Vec<(usize, Point3<f64>)> {
        let idx = dorsal_marker_vertices(3);
        let pts = model.pose_vertices(p, &idx).unwrap();
        idx.into_iter().zip(pts).collect()
    }

    #[test]
    fn exact_init_takes_no_step() {
        let model = mitten_hand::<f64>(false);
        let p = truth(1);
        let fit = fit_hand(&model, &observe(&model, &p), &p, &SolverSettings::default()).unwrap();
        assert_eq!(fit.accepted_steps, 0);
        assert!(fit.rms_residual < 1e-12);
        assert_eq!(fit.params, p);
    }

    #[test]
    fn recovers_perturbed_pose() {
        let model = mitten_hand::<f64>(false);
        let p = truth(2);
        let obs = observe(&model, &p);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut init = p.clone();
        for v in init.theta.iter_mut() {
            *v += rng.random_range(-0.1 / 3f64.sqrt()..0.1 / 3f64.sqrt());
        }
        init.translation += Vector3::new(0.01, -0.01, 0.005);
        let fit = fit_hand(&model, &obs, &init, &SolverSettings::default()).unwrap();
        assert!(fit.residual_trace.windows(2).all(|w| w[1] <= w[0]));
        let a = model.posed_joints(&fit.params).unwrap();
        let b = model.posed_joints(&p).unwrap();
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).norm()).sum::<f64>() / 21.0;
        assert!(err < 1e-3, "mean joint error {err}");
        assert!(fit.converged);
    }

    #[test]
    fn too_few_markers() {
        let model = mitten_hand::<f64>(false);
        let p = truth(4);
        let obs = observe(&model, &p);
        assert!(matches!(
            fit_hand(&model, &obs[..3], &p, &SolverSettings::default()),
            Err(Error::TooFewMarkers { needed: 4, got: 3 })
        ));
    }

    #[test]
    fn rigid_init_recovers_global_pose() {
        let model = mitten_hand::<f64>(true);
        let mut p = HandParams::zeros();
        p.set_joint_axis_angle(0, &Vector3::new(0.3, 1.2, -0.4));
        p.translation = Vector3::new(-0.2, 0.1, 0.05);
        let init = rigid_initialization(&model, &observe(&model, &p), &p.beta).unwrap();
        assert!((init.joint_axis_angle(0) - p.joint_axis_angle(0)).norm() < 1e-9);
        assert!((init.translation - p.translation).norm() < 1e-9);
    }

    #[test]
    fn shape_calibration_recovers_beta() {
        let model = mitten_hand::<f64>(false);
        let mut beta = vec![0.0; NUM_SHAPE];
        beta[0] = 0.8;
        beta[2] = -0.5;
        let frames: Vec<HandParams<f64>> = (0..3)
            .map(|s| {
                let mut p = truth(10 + s);
                p.theta.iter_mut().for_each(|v| *v *= 0.5);
                p.beta = beta.clone();
                p
            })
            .collect();
        let idx = dorsal_marker_vertices(4);
        let obs: Vec<Vec<_>> = frames
            .iter()
            .map(|p| idx.iter().copied().zip(model.pose_vertices(p, &idx).unwrap()).collect())
            .collect();
        let inits: Vec<HandParams<f64>> = frames
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.beta = vec![0.0; NUM_SHAPE];
                q.theta.iter_mut().for_each(|v| *v += 0.02);
                q
            })
            .collect();
        let cal = calibrate_shape(&model, &obs, &inits, &SolverSettings::default()).unwrap();
        assert!(cal.rms_residual < 1e-6, "{}", cal.rms_residual);
        assert!((cal.beta[0] - 0.8).abs() < 1e-2, "{:?}", cal.beta);
    }
}
