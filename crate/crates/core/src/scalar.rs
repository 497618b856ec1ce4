//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating point scalar the solvers are generic over (`f32` or `f64`).
///
/// Everything linear-algebraic goes through nalgebra's `RealField`; the
/// `num-traits` conversions are used for literals and for serialization.
pub trait Real:
    RealField + Copy + FromPrimitive + ToPrimitive + std::fmt::Debug + Send + Sync + 'static
{
    /// Converts an `f64` literal (tolerances, constants) into this scalar.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal must be representable")
    }

    /// Lossy conversion used when writing reports.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn nan() -> Self {
        Self::lit(f64::NAN)
    }

    fn machine_eps() -> Self {
        Self::default_epsilon()
    }
}

impl Real for f32 {}
impl Real for f64 {}
