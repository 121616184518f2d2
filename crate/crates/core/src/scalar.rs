//! Scalar abstraction shared by every map family.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the dynamics are computed in: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a signed index or count.
    fn from_int(n: i64) -> Self {
        <Self as FromPrimitive>::from_i64(n).expect("integer representable")
    }

    /// Lossy conversion back to `f64` for reporting.
    fn to_f64_lossy(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Smallest absolute tolerance that is meaningful for this type,
    /// i.e. `max(requested, 8 * machine epsilon)`.
    fn tol(requested: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(8.0);
        let req = Self::lit(requested);
        if req > floor {
            req
        } else {
            floor
        }
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
