//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar usable by the sampler: `f32` or `f64`.
///
/// Random draws are always made in `f64` and converted, so an `f32` and an
/// `f64` run with the same seed consume identical random streams.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + ScalarOperand + Sum + Debug + Display + Send + Sync + 'static
{
    /// Relative pivot threshold below which a design column counts as dependent.
    fn rank_tolerance() -> Self {
        let eps_floor = Self::epsilon() * Self::of(64.0);
        Self::of(1e-10).max(eps_floor)
    }

    /// Lossy conversion from an `f64` literal or draw.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Real")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize converts to every Real")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}
