//! Smooth bounded scalar trajectories from random-walk keyframes.

use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Monotone piecewise-cubic Hermite interpolant (Fritsch–Carlson).
///
/// C¹ everywhere and free of overshoot: every value lies between the
/// neighboring keyframe values.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    /// `xs` strictly increasing, same length as `ys`, at least one knot.
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        assert_eq!(xs.len(), ys.len());
        assert!(!xs.is_empty());
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
        let n = xs.len();
        if n == 1 {
            return Self {
                xs,
                ys,
                slopes: vec![0.0],
            };
        }
        let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i])).collect();
        let mut m = vec![0.0; n];
        m[0] = delta[0];
        m[n - 1] = delta[n - 2];
        for i in 1..n - 1 {
            m[i] = if delta[i - 1] * delta[i] <= 0.0 { 0.0 } else { (delta[i - 1] + delta[i]) / 2.0 };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                m[i] = 0.0;
                m[i + 1] = 0.0;
                continue;
            }
            let a = m[i] / delta[i];
            let b = m[i + 1] / delta[i];
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                m[i] = t * a * delta[i];
                m[i + 1] = t * b * delta[i];
            }
        }
        Self { xs, ys, slopes: m }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if n == 1 || x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.xs.partition_point(|&k| k <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.ys[i] + h10 * h * self.slopes[i] + h01 * self.ys[i + 1] + h11 * h * self.slopes[i + 1];
        // Exact in real arithmetic; the clamp only absorbs rounding.
        v.clamp(self.ys[i].min(self.ys[i + 1]), self.ys[i].max(self.ys[i + 1]))
    }
}

/// Per-frame values of a random walk through `[lo, hi]` with keyframes every
/// `interval` frames, interpolated by [`MonotoneCubic`].
pub fn random_walk<R: Rng>(rng: &mut R, frames: usize, interval: usize, lo: f64, hi: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo; frames];
    }
    let keys = frames.saturating_sub(1).div_ceil(interval) + 1;
    let step = Normal::new(0.0, (hi - lo) * 0.35).expect("positive spread");
    let mut y = rng.random_range(lo..=hi);
    let mut xs = Vec::with_capacity(keys);
    let mut ys = Vec::with_capacity(keys);
    for k in 0..keys {
        xs.push((k * interval) as f64);
        ys.push(y);
        y += step.sample(rng);
        // Reflect back into range.
        while y < lo || y > hi {
            y = if y < lo { 2.0 * lo - y } else { 2.0 * hi - y };
        }
    }
    let curve = MonotoneCubic::new(xs, ys);
    (0..frames).map(|f| curve.eval(f as f64)).collect()
}
