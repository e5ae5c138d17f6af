//! Scalar abstraction shared by behaviors, Bell expressions and the LP core.
//!
//! Anything that forms an ordered field with a tolerance works: `f32`, `f64`
//! and exact rationals (`Rational64`). Exact types use a zero tolerance, so
//! every comparison in the simplex and the validity checks is exact.

use std::fmt::{Debug, Display};

use num_rational::Rational64;
use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

pub trait Scalar:
    Num + Signed + Copy + PartialOrd + Debug + Display + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Tolerance used for feasibility and pivot decisions.
    fn tolerance() -> Self;

    /// Whether arithmetic on this type is exact.
    fn is_exact() -> bool;

    /// Lossy conversion from `f64`; exact types take the nearest simple fraction.
    fn from_f64_lossy(x: f64) -> Self {
        Self::from_f64(x).expect("value not representable")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_usize_lossy(x: usize) -> Self {
        Self::from_usize(x).expect("value not representable")
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for f64 {
    fn tolerance() -> Self {
        1e-9
    }
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for f32 {
    fn tolerance() -> Self {
        1e-5
    }
    fn is_exact() -> bool {
        false
    }
}

impl Scalar for Rational64 {
    fn tolerance() -> Self {
        Rational64::from_integer(0)
    }
    fn is_exact() -> bool {
        true
    }
    fn from_f64_lossy(x: f64) -> Self {
        // Binary fractions with small denominators survive; others are approximated.
        Rational64::approximate_float(x).expect("value not representable")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_tolerance_is_zero_and_exact() {
        assert!(Rational64::is_exact());
        assert_eq!(Rational64::tolerance(), Rational64::from_integer(0));
        assert_eq!(Rational64::from_f64_lossy(0.25), Rational64::new(1, 4));
    }

    #[test]
    fn float_tolerances() {
        assert!(!f64::is_exact());
        assert!(f32::tolerance() > f64::tolerance() as f32);
    }
}
