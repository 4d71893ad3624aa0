//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating-point type the model is evaluated in: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal; every supported type can represent (or round) it.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Lossy conversion for reporting and serialization.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Amplitude magnitude treated as a blow-up during propagation.
    fn divergence_threshold() -> Self;
}

impl Real for f32 {
    fn divergence_threshold() -> Self {
        1e30
    }
}

impl Real for f64 {
    fn divergence_threshold() -> Self {
        1e150
    }
}
