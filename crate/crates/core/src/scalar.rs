//! Scalar abstraction shared by every module.
//!
//! All market math is written against [`Scalar`]. The exact instantiation
//! ([`Rational`]) compares with zero slack; the float instantiations compare
//! with a small absolute tolerance so the same simplex and verifiers can run
//! in approximate arithmetic.

use std::fmt::{Debug, Display};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

/// Arbitrary-precision rational in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub trait Scalar:
    Clone + Debug + Display + PartialOrd + Signed + FromPrimitive + Send + Sync + 'static
{
    /// Absolute slack used by the comparison helpers. Zero for exact types.
    fn tolerance() -> Self;

    /// Whether arithmetic on this type is exact.
    fn is_exact() -> bool;

    fn from_rational(r: &Rational) -> Self;

    /// Exact rational value of `self` (dyadic for floats).
    fn to_rational(&self) -> Rational;

    fn to_f64(&self) -> f64;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    fn from_int(v: i64) -> Self {
        Self::from_rational(&Rational::from_integer(BigInt::from(v)))
    }

    fn is_zero_tol(&self) -> bool {
        self.abs() <= Self::tolerance()
    }

    /// `self > 0` beyond tolerance.
    fn is_pos_tol(&self) -> bool {
        *self > Self::tolerance()
    }

    /// `self < 0` beyond tolerance.
    fn is_neg_tol(&self) -> bool {
        *self < -Self::tolerance()
    }

    fn eq_tol(&self, other: &Self) -> bool {
        (self.clone() - other.clone()).is_zero_tol()
    }

    /// `self <= other` up to tolerance.
    fn le_tol(&self, other: &Self) -> bool {
        !(self.clone() - other.clone()).is_pos_tol()
    }

    /// `self >= other` up to tolerance.
    fn ge_tol(&self, other: &Self) -> bool {
        !(self.clone() - other.clone()).is_neg_tol()
    }
}

impl Scalar for Rational {
    fn tolerance() -> Self {
        Rational::zero()
    }

    fn is_exact() -> bool {
        true
    }

    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }

    fn to_rational(&self) -> Rational {
        self.clone()
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn is_zero_tol(&self) -> bool {
        self.is_zero()
    }

    fn is_pos_tol(&self) -> bool {
        self.is_positive()
    }

    fn is_neg_tol(&self) -> bool {
        self.is_negative()
    }
}

macro_rules! float_scalar {
    ($t:ty, $tol:expr) => {
        impl Scalar for $t {
            fn tolerance() -> Self {
                $tol
            }

            fn is_exact() -> bool {
                false
            }

            fn from_rational(r: &Rational) -> Self {
                ToPrimitive::to_f64(r).unwrap_or(f64::NAN) as $t
            }

            fn to_rational(&self) -> Rational {
                Rational::from_float(*self).expect("finite float")
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }
        }
    };
}

float_scalar!(f64, 1e-9);
float_scalar!(f32, 1e-5);

/// Sum of products of two equally long slices.
pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

pub fn sum<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |acc, x| acc + x.clone())
}

/// Largest element, `None` on an empty slice.
pub fn max_of<T: Scalar>(v: &[T]) -> Option<T> {
    v.iter()
        .cloned()
        .reduce(|a, b| if b > a { b } else { a })
}

pub fn min_of<T: Scalar>(v: &[T]) -> Option<T> {
    v.iter()
        .cloned()
        .reduce(|a, b| if b < a { b } else { a })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal `{0}` (expected an integer or `num/den`)")]
pub struct ParseRationalError(pub String);

/// Parses `"7"`, `"-3/4"` or `" 10 / 4 "` into a reduced rational. Decimal
/// points and exponents are rejected.
pub fn parse_rational(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num = BigInt::from_str(num).map_err(|_| err())?;
    let den = BigInt::from_str(den).map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// Canonical `num/den` form; integers keep an explicit `/1`.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn rational_one() -> Rational {
    Rational::one()
}
