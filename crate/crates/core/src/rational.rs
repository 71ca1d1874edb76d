//! Exact rationals in canonical lowest terms.
//!
//! Every distance, Lipschitz constant and ratio in the crate is a [`Rat`].
//! The textual form is always `"num/den"` with `gcd(|num|, den) = 1` and
//! `den > 0`; [`Rat::parse_canonical`] rejects anything else.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary precision rational, always reduced.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rat(BigRational);

impl Rat {
    pub fn new(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        let den = den.into();
        assert!(!den.is_zero(), "zero denominator");
        Rat(BigRational::new(num.into(), den))
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Rat(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Rat(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Rat {
        Rat(self.0.abs())
    }

    /// Panics on zero.
    pub fn recip(&self) -> Rat {
        Rat(self.0.recip())
    }

    /// `self^exp` for a signed exponent. Panics for `0^negative`.
    pub fn pow(&self, exp: i32) -> Rat {
        Rat(num::traits::Pow::pow(&self.0, exp))
    }

    pub fn min(self, other: Rat) -> Rat {
        std::cmp::min(self, other)
    }

    pub fn max(self, other: Rat) -> Rat {
        std::cmp::max(self, other)
    }

    /// Smallest integer `>= self`.
    pub fn ceil_int(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Midpoint of two rationals, exact.
    pub fn midpoint(a: &Rat, b: &Rat) -> Rat {
        (a + b) / Rat::from_int(2)
    }

    /// Lossy conversion, only for human-facing diagnostics.
    pub fn approx_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Parses the canonical `"num/den"` form. Non-reduced fractions, a
    /// non-positive denominator, whitespace, or a missing `/den` are errors.
    pub fn parse_canonical(s: &str) -> Result<Rat> {
        let bad = |why: &str| Error::NonCanonical { text: s.to_string(), reason: why.to_string() };
        let (n, d) = s.split_once('/').ok_or_else(|| bad("expected num/den"))?;
        let num = parse_int(n).ok_or_else(|| bad("numerator is not an integer"))?;
        if d.starts_with(['+', '-']) {
            return Err(bad("denominator must be an unsigned integer"));
        }
        let den = parse_int(d).ok_or_else(|| bad("denominator is not an integer"))?;
        if !den.is_positive() {
            return Err(bad("denominator must be positive"));
        }
        if !num.gcd(&den).is_one() {
            return Err(bad("fraction is not in lowest terms"));
        }
        Ok(Rat(BigRational::new_raw(num, den)))
    }

    /// Like [`Rat::parse_canonical`] but also accepts a bare integer.
    pub fn parse_lenient(s: &str) -> Result<Rat> {
        if s.contains('/') {
            Rat::parse_canonical(s)
        } else {
            parse_int(s).map(Rat::from_int).ok_or_else(|| Error::NonCanonical {
                text: s.to_string(),
                reason: "expected integer or num/den".into(),
            })
        }
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // "007" would round-trip to "7"; only the canonical spelling is accepted.
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    if s.starts_with('-') && digits == "0" {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rat> {
        Rat::parse_canonical(s)
    }
}

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        Rat::parse_canonical(&s).map_err(serde::de::Error::custom)
    }
}

impl From<i64> for Rat {
    fn from(n: i64) -> Rat {
        Rat::from_int(n)
    }
}

impl From<BigInt> for Rat {
    fn from(n: BigInt) -> Rat {
        Rat::from_int(n)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat(self.0.$m(rhs.0))
            }
        }
        impl $tr<&Rat> for Rat {
            type Output = Rat;
            fn $m(self, rhs: &Rat) -> Rat {
                Rat(self.0.$m(&rhs.0))
            }
        }
        impl $tr<Rat> for &Rat {
            type Output = Rat;
            fn $m(self, rhs: Rat) -> Rat {
                Rat((&self.0).$m(rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl Neg for Rat {
    type Output = Rat;
    fn neg(self) -> Rat {
        Rat(-self.0)
    }
}

impl Sum for Rat {
    fn sum<I: Iterator<Item = Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

impl<'a> Sum<&'a Rat> for Rat {
    fn sum<I: Iterator<Item = &'a Rat>>(iter: I) -> Rat {
        iter.fold(Rat::zero(), |a, b| a + b)
    }
}

/// Shorthand for tests and fixtures: `rat(3, 2)` is 3/2.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(num, den)
}
