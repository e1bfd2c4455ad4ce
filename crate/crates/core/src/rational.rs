//! Exact rational numbers for exponents and polynomial coefficients.
//!
//! Serialized as `"num/den"` strings so that model files round-trip exactly.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::GermError;

/// A reduced fraction with positive denominator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(Ratio<i64>);

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self, GermError> {
        if den == 0 {
            return Err(GermError::InvalidInput("zero denominator".into()));
        }
        Ok(Self(Ratio::new(num, den)))
    }

    pub const fn int(n: i64) -> Self {
        Self(Ratio::new_raw(n, 1))
    }

    pub fn zero() -> Self {
        Self(Ratio::zero())
    }

    pub fn one() -> Self {
        Self(Ratio::one())
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Nearest rational with denominator at most `max_den`.
    pub fn approximate(x: f64, max_den: i64) -> Self {
        let mut best = Self::int(x.round() as i64);
        let mut best_err = (x - best.to_f64()).abs();
        for den in 2..=max_den {
            let num = (x * den as f64).round() as i64;
            let cand = Self(Ratio::new(num, den));
            let err = (x - cand.to_f64()).abs();
            if err < best_err - 1e-15 {
                best = cand;
                best_err = err;
            }
        }
        best
    }

    /// `t^self`, with `t^0 = 1` even at `t = 0`.
    pub fn pow_of(&self, t: f64) -> f64 {
        if self.is_zero() {
            1.0
        } else if self.is_integer() {
            t.powi(self.numer() as i32)
        } else {
            t.powf(self.to_f64())
        }
    }
}

impl Default for Rational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Self::int(n)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $op:tt) => {
        impl std::ops::$tr for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0 $op rhs.0)
            }
        }
    };
}
binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);
binop!(Div, div, /);

impl std::ops::Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl std::ops::AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl FromStr for Rational {
    type Err = GermError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GermError::Parse(format!("bad rational {s:?}"));
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                let d: i64 = d.trim().parse().map_err(|_| bad())?;
                Rational::new(n, d).map_err(|_| bad())
            }
            None => s.parse::<i64>().map(Rational::int).map_err(|_| bad()),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_and_normalizes_sign() {
        let r = Rational::new(6, -4).unwrap();
        assert_eq!((r.numer(), r.denom()), (-3, 2));
        assert_eq!(r.to_string(), "-3/2");
    }

    #[test]
    fn zero_denominator_rejected() {
        assert!(Rational::new(1, 0).is_err());
    }

    #[test]
    fn parses_both_forms() {
        assert_eq!("5".parse::<Rational>().unwrap(), Rational::int(5));
        assert_eq!("10/4".parse::<Rational>().unwrap(), Rational::new(5, 2).unwrap());
        assert!("x/2".parse::<Rational>().is_err());
    }

    #[test]
    fn serde_string_form() {
        let r = Rational::new(5, 4).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, "\"5/4\"");
        let back: Rational = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn powers() {
        assert_eq!(Rational::zero().pow_of(0.0), 1.0);
        assert!((Rational::new(5, 4).unwrap().pow_of(16.0) - 32.0).abs() < 1e-12);
        assert_eq!(Rational::int(3).pow_of(0.5), 0.125);
    }

    #[test]
    fn approximate_recovers_simple_fractions() {
        assert_eq!(Rational::approximate(2.5, 16), Rational::new(5, 2).unwrap());
        assert_eq!(Rational::approximate(3.0, 16), Rational::int(3));
    }
}
