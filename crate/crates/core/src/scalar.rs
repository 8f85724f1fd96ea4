use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Real scalar the numeric core is written against (`f32` or `f64`).
///
/// `Display` must print a string that `FromStr` parses back to the same
/// value; the text formats rely on it.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Debug + Display + FromStr + Send + Sync + 'static
{
    fn from_usize_exact(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable as a float")
    }

    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Ratio of two counts.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_usize_exact(num) / Self::from_usize_exact(den)
    }

    fn hundred() -> Self {
        Self::lit(100.0)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Three-valued sign: -1, 0 or +1. Zero (of either sign) maps to 0.
pub fn sgn<T: Scalar>(x: T) -> i8 {
    if x > T::zero() {
        1
    } else if x < T::zero() {
        -1
    } else {
        0
    }
}

/// Unweighted mean; `None` for an empty input.
pub fn mean<T: Scalar, I: IntoIterator<Item = T>>(values: I) -> Option<T> {
    let mut n = 0usize;
    let mut total = T::zero();
    for v in values {
        total = total + v;
        n += 1;
    }
    (n > 0).then(|| total / T::from_usize_exact(n))
}
