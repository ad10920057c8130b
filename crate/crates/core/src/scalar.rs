use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive};

/// Floating-point type used for weights and guess scores.
///
/// Implemented for `f32` and `f64`; the crate root aliases pick `f64`.
pub trait Scalar:
    Float + FromPrimitive + FromStr + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal constant; every `f64` literal used by the crate is representable.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
