//! Arbitrary-precision rationals plus an explicit positive infinity.
//!
//! This is deliberately not a general number tower: it is the minimal exact
//! arithmetic the exponent algebra needs. Infinity is a first-class exponent
//! value (`L^∞` shows up as an endpoint), not an error state.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A reduced fraction with positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rational {
    num: BigInt,
    den: BigInt,
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Self {
        Self::from_bigints(num.into(), den.into())
    }

    pub fn from_int(n: i64) -> Self {
        Rational {
            num: n.into(),
            den: 1.into(),
        }
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Self {
        assert!(!den.is_zero(), "rational with zero denominator");
        let (num, den) = if den.is_negative() {
            (-num, -den)
        } else {
            (num, den)
        };
        let g = num.gcd(&den);
        Rational {
            num: &num / &g,
            den: &den / &g,
        }
    }

    /// Parses `"3"`, `"7/3"`, `"-2/5"`.
    pub fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        let (n, d) = match text.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (text, "1"),
        };
        let num: BigInt = n.parse().map_err(|_| format!("bad numerator {n:?}"))?;
        let den: BigInt = d.parse().map_err(|_| format!("bad denominator {d:?}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {text:?}"));
        }
        Ok(Self::from_bigints(num, den))
    }

    pub fn zero() -> Self {
        Self::from_int(0)
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.num == self.den
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.num.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.den == BigInt::from(1)
    }

    pub fn recip(&self) -> Option<Rational> {
        if self.is_zero() {
            None
        } else {
            Some(Rational::from_bigints(self.den.clone(), self.num.clone()))
        }
    }

    pub fn numer(&self) -> &BigInt {
        &self.num
    }

    pub fn denom(&self) -> &BigInt {
        &self.den
    }

    /// Lossy view for display and sorting only; never feeds back into checks.
    pub fn to_f64(&self) -> f64 {
        self.num.to_f64().unwrap_or(f64::NAN) / self.den.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl $trait<Rational> for &Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
    };
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational::from_bigints(
            &self.num * &rhs.den + &rhs.num * &self.den,
            &self.den * &rhs.den,
        )
    }
}

impl Sub for &Rational {
    type Output = Rational;
    fn sub(self, rhs: &Rational) -> Rational {
        Rational::from_bigints(
            &self.num * &rhs.den - &rhs.num * &self.den,
            &self.den * &rhs.den,
        )
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational::from_bigints(&self.num * &rhs.num, &self.den * &rhs.den)
    }
}

impl Div for &Rational {
    type Output = Rational;
    fn div(self, rhs: &Rational) -> Rational {
        assert!(!rhs.is_zero(), "rational division by zero");
        Rational::from_bigints(&self.num * &rhs.den, &self.den * &rhs.num)
    }
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational {
            num: -self.num.clone(),
            den: self.den.clone(),
        }
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        -&self
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        // Denominators are positive, so cross-multiplying preserves order.
        (&self.num * &other.den).cmp(&(&other.num * &self.den))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// A Lebesgue exponent: a finite rational or positive infinity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Exponent {
    Finite(Rational),
    Infinity,
}

impl Exponent {
    pub fn finite(num: i64, den: i64) -> Self {
        Exponent::Finite(Rational::new(num, den))
    }

    pub fn from_int(n: i64) -> Self {
        Exponent::Finite(Rational::from_int(n))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            Exponent::Finite(r) => Some(r),
            Exponent::Infinity => None,
        }
    }

    /// `1/q`, with `1/∞ = 0`. `None` for the exponent 0, whose reciprocal is
    /// not a rational.
    pub fn reciprocal(&self) -> Option<Rational> {
        match self {
            Exponent::Infinity => Some(Rational::zero()),
            Exponent::Finite(r) => r.recip(),
        }
    }

    /// Hölder conjugate: `1/q + 1/q' = 1`. The conjugate of 1 is ∞ and vice
    /// versa; 0 has none.
    pub fn conjugate(&self) -> Option<Exponent> {
        match self {
            Exponent::Infinity => Some(Exponent::Finite(Rational::one())),
            Exponent::Finite(r) if r.is_zero() => None,
            Exponent::Finite(r) if r.is_one() => Some(Exponent::Infinity),
            Exponent::Finite(r) => Some(Exponent::Finite(r / &(r - &Rational::one()))),
        }
    }
}

impl From<Rational> for Exponent {
    fn from(r: Rational) -> Self {
        Exponent::Finite(r)
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Exponent {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Exponent::Infinity, Exponent::Infinity) => Ordering::Equal,
            (Exponent::Infinity, Exponent::Finite(_)) => Ordering::Greater,
            (Exponent::Finite(_), Exponent::Infinity) => Ordering::Less,
            (Exponent::Finite(a), Exponent::Finite(b)) => a.cmp(b),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => write!(f, "inf"),
            Exponent::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_normalizes_sign() {
        assert_eq!(Rational::new(6, -4), Rational::new(-3, 2));
        assert_eq!(Rational::new(0, -7), Rational::zero());
        assert_eq!(Rational::new(28, 49).to_string(), "4/7");
    }

    #[test]
    fn parses_integer_and_fraction_forms() {
        assert_eq!(Rational::parse("7/3").unwrap(), Rational::new(7, 3));
        assert_eq!(Rational::parse(" -2/5 ").unwrap(), Rational::new(-2, 5));
        assert_eq!(Rational::parse("3").unwrap(), Rational::from_int(3));
        assert!(Rational::parse("1/0").is_err());
        assert!(Rational::parse("x").is_err());
    }

    #[test]
    fn arithmetic_is_exact() {
        let a = Rational::new(1, 3);
        let b = Rational::new(1, 6);
        assert_eq!(&a + &b, Rational::new(1, 2));
        assert_eq!(&a - &b, Rational::new(1, 6));
        assert_eq!(&a * &b, Rational::new(1, 18));
        assert_eq!(&a / &b, Rational::from_int(2));
    }

    #[test]
    fn ordering_crosses_denominators() {
        assert!(Rational::new(2, 3) < Rational::new(7, 10));
        assert!(Rational::new(-1, 2) < Rational::zero());
        assert!(Exponent::Infinity > Exponent::finite(1_000_000, 1));
    }

    #[test]
    fn infinity_reciprocal_is_zero() {
        assert_eq!(Exponent::Infinity.reciprocal(), Some(Rational::zero()));
        assert_eq!(Exponent::finite(0, 1).reciprocal(), None);
    }

    #[test]
    fn conjugates_pair_up() {
        assert_eq!(
            Exponent::from_int(1).conjugate(),
            Some(Exponent::Infinity)
        );
        assert_eq!(
            Exponent::Infinity.conjugate(),
            Some(Exponent::from_int(1))
        );
        assert_eq!(
            Exponent::from_int(2).conjugate(),
            Some(Exponent::from_int(2))
        );
        // Conjugation runs through sub-unit exponents into negative values;
        // the algebra stays consistent: (24/25)' = -24 and back.
        let named = Exponent::finite(24, 25);
        let conj = named.conjugate().unwrap();
        assert_eq!(conj, Exponent::from_int(-24));
        assert_eq!(conj.conjugate().unwrap(), named);
    }
}
