//! Numeric abstraction shared by every fingerprint computation.
//!
//! Memberships, accumulated activations and similarity scores are all
//! expressed over a [`Scalar`]. `f64` is the working type, `f32` is supported
//! for compact storage, and [`Exact`] (a 64-bit rational) gives bit-exact
//! arithmetic for golden fixtures where decimal ladders like `0.9` must not
//! pick up rounding error.

use std::fmt::{Debug, Display};

use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

/// Exact rational scalar.
pub type Exact = Ratio<i64>;

pub trait Scalar:
    Num + Signed + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// False for NaN and infinities. Rationals are always finite.
    fn is_finite_value(self) -> bool;

    /// Converts from an `f64`, returning `None` if the value is not representable.
    fn from_f64_value(value: f64) -> Option<Self>;

    fn to_f64_value(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn min_value(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }

    fn from_f64_value(value: f64) -> Option<Self> {
        Some(value)
    }
}

impl Scalar for f32 {
    fn is_finite_value(self) -> bool {
        self.is_finite()
    }

    fn from_f64_value(value: f64) -> Option<Self> {
        let v = value as f32;
        if value.is_finite() && !v.is_finite() {
            None
        } else {
            Some(v)
        }
    }
}

impl Scalar for Exact {
    fn is_finite_value(self) -> bool {
        true
    }

    // Decimal inputs such as 0.3 are not dyadic; approximate them by the
    // simplest fraction within 1e-12 rather than the exact binary expansion.
    fn from_f64_value(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        simplest_ratio(value, 1e-12)
    }
}

/// Continued-fraction search for the simplest rational within `tolerance`.
fn simplest_ratio(value: f64, tolerance: f64) -> Option<Exact> {
    let negative = value < 0.0;
    let mut x = value.abs();
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    for _ in 0..64 {
        let a = x.floor();
        if a > i64::MAX as f64 {
            return None;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let approx = h1 as f64 / k1 as f64;
        if (approx - value.abs()).abs() <= tolerance {
            break;
        }
        let frac = x - a as f64;
        if frac == 0.0 {
            break;
        }
        x = 1.0 / frac;
    }
    let r = Ratio::new(h1, k1);
    Some(if negative { -r } else { r })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_from_decimal() {
        assert_eq!(Exact::from_f64_value(0.3), Some(Ratio::new(3, 10)));
        assert_eq!(Exact::from_f64_value(-0.9), Some(Ratio::new(-9, 10)));
        assert_eq!(Exact::from_f64_value(1.0), Some(Ratio::from_integer(1)));
        assert_eq!(Exact::from_f64_value(f64::NAN), None);
    }

    #[test]
    fn f32_overflow_rejected() {
        assert_eq!(<f32 as Scalar>::from_f64_value(1e300), None);
        assert_eq!(<f32 as Scalar>::from_f64_value(0.5), Some(0.5f32));
    }
}
