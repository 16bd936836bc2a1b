//! Scalar abstraction shared by the channel, graph, clique and power code.
//!
//! Random draws and configuration values are always produced in `f64` and
//! converted once, so an `f32` pipeline sees the same realization as the
//! `f64` one up to rounding.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::float::FloatConst;
use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the optimization runs in: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal or configuration value.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Scalar")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Scalar converts to f64")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
