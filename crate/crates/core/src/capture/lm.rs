//! Dense Levenberg–Marquardt with Marquardt diagonal scaling.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::Real;

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings<T: Real> {
    pub max_iterations: usize,
    /// Stop once the RMS residual (over residual components) drops to this, meters.
    pub residual_tolerance: T,
    pub damping_init: T,
    /// Stop once an accepted step is this small relative to the parameter norm.
    pub step_tolerance: T,
    /// Central finite-difference step for numeric Jacobians.
    pub fd_step: T,
}

impl<T: Real> Default for SolverSettings<T> {
    fn default() -> Self {
        Self {
            max_iterations: 50,
            residual_tolerance: T::lit(1e-9),
            damping_init: T::lit(1e-3),
            step_tolerance: T::lit(1e-10),
            fd_step: T::fd_step(),
        }
    }
}

impl<T: Real> SolverSettings<T> {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.max_iterations > 0
            && self.residual_tolerance > T::zero()
            && self.damping_init > T::zero()
            && self.step_tolerance > T::zero()
            && self.fd_step > T::zero();
        if ok {
            Ok(())
        } else {
            Err(crate::Error::Config("solver settings must all be positive".into()))
        }
    }
}

pub trait LeastSquaresProblem<T: Real> {
    fn residuals(&self, params: &DVector<T>) -> DVector<T>;

    /// Central differences by default.
    fn jacobian(&self, params: &DVector<T>, step: T) -> DMatrix<T> {
        let mut x = params.clone();
        let mut columns = Vec::with_capacity(params.len());
        let two_h = step + step;
        for j in 0..params.len() {
            let orig = x[j];
            x[j] = orig + step;
            let plus = self.residuals(&x);
            x[j] = orig - step;
            let minus = self.residuals(&x);
            x[j] = orig;
            columns.push((plus - minus) / two_h);
        }
        DMatrix::from_columns(&columns)
    }
}

#[derive(Debug, Clone)]
pub struct LmReport<T: Real> {
    pub params: DVector<T>,
    /// RMS over residual components at `params`.
    pub rms_residual: T,
    pub iterations: usize,
    pub accepted_steps: usize,
    /// False when `max_iterations` ran out before a stopping criterion was met.
    pub converged: bool,
    /// RMS residual at the start and after every accepted step.
    pub residual_trace: Vec<T>,
}

fn rms<T: Real>(r: &DVector<T>) -> T {
    if r.is_empty() {
        return T::zero();
    }
    (r.norm_squared() / T::from_usize_lossy(r.len())).sqrt()
}

const MAX_DAMPING: f64 = 1e12;

/// Minimizes `½‖r(x)‖²` from `x0`. Returns the best iterate found; the
/// residual never increases across accepted steps.
pub fn levenberg_marquardt<T: Real, P: LeastSquaresProblem<T>>(
    problem: &P,
    x0: DVector<T>,
    settings: &SolverSettings<T>,
) -> LmReport<T> {
    let mut x = x0;
    let mut r = problem.residuals(&x);
    let mut cost = r.norm_squared();
    let mut trace = vec![rms(&r)];
    let mut lambda = settings.damping_init;
    let mut accepted = 0;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < settings.max_iterations {
        if rms(&r) <= settings.residual_tolerance || !cost.is_finite() {
            converged = true;
            break;
        }
        iterations += 1;
        let jac = problem.jacobian(&x, settings.fd_step);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let max_diag = jtj.diagonal().iter().fold(T::zero(), |a, &b| a.max(b));
        let floor = if max_diag > T::zero() {
            max_diag * T::lit(1e-9)
        } else {
            T::one()
        };

        let mut stepped = false;
        loop {
            let mut a = jtj.clone();
            for j in 0..a.nrows() {
                a[(j, j)] += lambda * jtj[(j, j)].max(floor);
            }
            let step = Cholesky::new(a).map(|c| -c.solve(&g));
            if let Some(delta) = step.filter(|d| d.iter().all(|v| v.is_finite())) {
                let candidate = &x + &delta;
                let r_new = problem.residuals(&candidate);
                let cost_new = r_new.norm_squared();
                if cost_new < cost {
                    let small = delta.norm()
                        <= settings.step_tolerance * (x.norm() + settings.step_tolerance);
                    x = candidate;
                    r = r_new;
                    cost = cost_new;
                    trace.push(rms(&r));
                    accepted += 1;
                    lambda = (lambda / T::lit(10.0)).max(T::lit(1e-15));
                    stepped = true;
                    if small {
                        converged = true;
                    }
                    break;
                }
            }
            lambda *= T::lit(10.0);
            if lambda > T::lit(MAX_DAMPING) {
                break;
            }
        }
        if !stepped {
            // no descent direction left at any damping: stationary point
            converged = true;
            break;
        }
        if converged {
            break;
        }
    }
    if !converged && rms(&r) <= settings.residual_tolerance {
        converged = true;
    }
    LmReport {
        rms_residual: rms(&r),
        params: x,
        iterations,
        accepted_steps: accepted,
        converged,
        residual_trace: trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl LeastSquaresProblem<f64> for Rosenbrock {
        fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
            DVector::from_vec(vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]])
        }
    }

    struct Exp {
        t: Vec<f64>,
        y: Vec<f64>,
    }

    impl LeastSquaresProblem<f64> for Exp {
        fn residuals(&self, p: &DVector<f64>) -> DVector<f64> {
            DVector::from_iterator(
                self.t.len(),
                self.t.iter().zip(&self.y).map(|(t, y)| p[0] * (p[1] * t).exp() - y),
            )
        }
    }

    #[test]
    fn solves_rosenbrock() {
        let rep = levenberg_marquardt(&Rosenbrock, DVector::from_vec(vec![-1.2, 1.0]), &SolverSettings::default());
        assert!(rep.converged);
        assert!((rep.params[0] - 1.0).abs() < 1e-6 && (rep.params[1] - 1.0).abs() < 1e-6);
        assert!(rep.residual_trace.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn exact_start_takes_no_step() {
        let t: Vec<f64> = (0..10).map(|i| i as f64 * 0.1).collect();
        let y = t.iter().map(|t| 2.0 * (-0.5 * t).exp()).collect();
        let rep = levenberg_marquardt(&Exp { t, y }, DVector::from_vec(vec![2.0, -0.5]), &SolverSettings::default());
        assert_eq!(rep.accepted_steps, 0);
        assert!(rep.converged);
    }

    #[test]
    fn iteration_cap_is_flagged() {
        let settings = SolverSettings {
            max_iterations: 1,
            ..SolverSettings::default()
        };
        let rep = levenberg_marquardt(&Rosenbrock, DVector::from_vec(vec![-1.2, 1.0]), &settings);
        assert!(!rep.converged);
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn numeric_jacobian_matches_analytic() {
        let p = DVector::from_vec(vec![0.3, 0.7]);
        let j = Rosenbrock.jacobian(&p, 1e-6);
        assert!((j[(0, 0)] + 20.0 * 0.3).abs() < 1e-8);
        assert!((j[(0, 1)] - 10.0).abs() < 1e-8);
        assert!((j[(1, 0)] + 1.0).abs() < 1e-8);
    }
}
