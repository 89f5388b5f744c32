//! Scalar abstraction for the geometry core.

use num_traits::{Float, FloatConst, FromPrimitive};
use std::fmt::Debug;

/// Floating point scalar usable by the geometry, camera and raycasting code: f32 or f64.
pub trait Real: Float + FloatConst + FromPrimitive + Debug + Default + Send + Sync + 'static {
    /// Converts an `f64` constant into this scalar type.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
