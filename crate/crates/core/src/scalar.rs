//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssignOps, ToPrimitive};

/// Floating point type the solvers and bandit algorithms are generic over.
///
/// Implemented for `f32` and `f64`. Literal constants are produced with
/// [`Real::lit`], which keeps the call sites readable.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssignOps + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Never fails for the two supported types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion to `f64` for reporting and for the f64-only LP solver.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite conversion to f64")
    }

    /// Floor applied to sampling weights before inverting them.
    ///
    /// Relative to the largest weight; about `1e-12` for `f64`.
    #[inline]
    fn weight_floor() -> Self {
        Self::epsilon().powf(Self::lit(0.75))
    }
}

impl Real for f32 {}
impl Real for f64 {}
