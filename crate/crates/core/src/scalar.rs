// SPDX-License-Identifier: Apache-2.0

use std::fmt::{Debug, Display};

/// Floating point scalar used for entropies, thresholds and correlations.
///
/// Implemented for `f32` and `f64`; the crate root re-exports `f64`
/// instantiations of the generic types.
pub trait Scalar:
    num_traits::Float + num_traits::FromPrimitive + num_traits::NumCast + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from an integer count.
    fn from_count(n: u64) -> Self {
        <Self as num_traits::FromPrimitive>::from_u64(n).expect("count representable as float")
    }

    fn lit(value: f64) -> Self {
        <Self as num_traits::FromPrimitive>::from_f64(value).expect("literal representable")
    }

    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
