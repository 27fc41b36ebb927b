//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the models, solvers and metrics.
///
/// Implemented for `f32` and `f64`. Arithmetic and transcendental functions
/// come from [`RealField`]; conversions go through `num-traits`.
pub trait Real:
    RealField + Copy + Default + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal, panicking only for values the type cannot hold at all.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Central-difference step suited to the type's precision.
    fn fd_step() -> Self;
}

impl Real for f32 {
    fn fd_step() -> Self {
        f32::EPSILON.sqrt()
    }
}

impl Real for f64 {
    fn fd_step() -> Self {
        1e-6
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literals_round_trip() {
        assert_eq!(<f64 as Real>::lit(0.1), 0.1);
        assert_eq!(<f32 as Real>::lit(0.5), 0.5f32);
        assert_eq!(<f32 as Real>::from_usize_lossy(21), 21.0);
        assert!(<f32 as Real>::fd_step() > 1e-4);
    }
}
