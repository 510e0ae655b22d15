//! Scalar abstraction shared by the game-level math.
//!
//! Exact types (`Ratio<i64>`, `Ratio<i128>`, `BigRational`) compare with zero
//! tolerance, so `f == 0` is a literal equality. Floating types carry a small
//! tolerance for the simplex check only.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num + Signed + Clone + Debug + PartialOrd + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Slack allowed when checking that probabilities sum to one.
    fn sum_tolerance() -> Self;

    /// Largest integer not greater than `self`.
    fn floor_value(&self) -> Self;

    fn is_exact() -> bool {
        Self::sum_tolerance().is_zero()
    }

    fn from_int(v: i64) -> Self {
        Self::from_i64(v).expect("integer is representable")
    }

    /// `num / den`.
    fn from_fraction(num: i64, den: i64) -> Self {
        Self::from_int(num) / Self::from_int(den)
    }

    /// Lossy conversion used for acceptance probabilities and reporting.
    fn as_f64(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn sum_tolerance() -> Self {
        1e-9
    }
    fn floor_value(&self) -> Self {
        self.floor()
    }
}

impl Scalar for f32 {
    fn sum_tolerance() -> Self {
        1e-5
    }
    fn floor_value(&self) -> Self {
        self.floor()
    }
}

macro_rules! exact_scalar {
    ($($t:ty)*) => ($(
        impl Scalar for $t {
            fn sum_tolerance() -> Self {
                num_traits::Zero::zero()
            }
            fn floor_value(&self) -> Self {
                self.floor()
            }
        }
    )*)
}

exact_scalar!(Ratio<i64> Ratio<i128> Ratio<BigInt>);

pub(crate) fn max_of<T: Scalar>(values: impl IntoIterator<Item = T>) -> Option<T> {
    values
        .into_iter()
        .fold(None, |best, v| match best {
            Some(b) if b >= v => Some(b),
            _ => Some(v),
        })
}
