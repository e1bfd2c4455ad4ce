//! Integer Laurent polynomials in one variable `t`, with arbitrary-precision coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{GermError, Result};

/// `Σ c_e t^e`; zero coefficients are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: BTreeMap<i64, BigInt>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn monomial(c: i64, e: i64) -> Self {
        let mut p = Self::zero();
        p.add_term(e, BigInt::from(c));
        p
    }

    /// `Σ coeffs[i] t^i`.
    pub fn from_coeffs(coeffs: &[i64]) -> Self {
        let mut p = Self::zero();
        for (i, &c) in coeffs.iter().enumerate() {
            p.add_term(i as i64, BigInt::from(c));
        }
        p
    }

    fn add_term(&mut self, e: i64, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(e).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        self.terms.get(&e).cloned().unwrap_or_default()
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Coefficients from the lowest to the highest exponent.
    pub fn coeffs(&self) -> Vec<BigInt> {
        match (self.min_exp(), self.max_exp()) {
            (Some(lo), Some(hi)) => (lo..=hi).map(|e| self.coeff(e)).collect(),
            _ => Vec::new(),
        }
    }

    pub fn shift(&self, k: i64) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect() }
    }

    /// Canonical representative up to units `±t^k`: lowest exponent 0, positive leading coefficient.
    pub fn normalized(&self) -> Self {
        let Some(lo) = self.min_exp() else { return Self::zero() };
        let p = self.shift(-lo);
        if p.terms.values().next_back().is_some_and(|c| c.is_negative()) {
            -&p
        } else {
            p
        }
    }

    /// `t ↦ t⁻¹`.
    pub fn mirror(&self) -> Self {
        Self { terms: self.terms.iter().map(|(e, c)| (-e, c.clone())).collect() }
    }

    /// Exact division in `Z[t, t⁻¹]`; fails when `d` does not divide `self`.
    pub fn div_exact(&self, d: &LaurentPoly) -> Result<LaurentPoly> {
        let (Some(dlo), Some(dhi)) = (d.min_exp(), d.max_exp()) else {
            return Err(GermError::Degenerate("division by the zero polynomial".into()));
        };
        let lead = d.coeff(dhi);
        let mut rem = self.clone();
        let mut q = LaurentPoly::zero();
        while let Some(rhi) = rem.max_exp() {
            if rem.min_exp().unwrap() < dlo || rhi - dhi < rem.min_exp().unwrap() - dlo {
                return Err(GermError::Degenerate("inexact polynomial division".into()));
            }
            let c = rem.coeff(rhi);
            if !(&c % &lead).is_zero() {
                return Err(GermError::Degenerate("inexact polynomial division".into()));
            }
            let term = LaurentPoly { terms: BTreeMap::from([(rhi - dhi, c / &lead)]) };
            rem = &rem - &(&term * d);
            q = &q + &term;
        }
        Ok(q)
    }

    /// Value at `t = x`, for quick numerical checks.
    pub fn eval_i64(&self, x: i64) -> BigInt {
        let mut acc = BigInt::zero();
        for (&e, c) in &self.terms {
            assert!(e >= 0, "eval_i64 needs non-negative exponents");
            acc += c * BigInt::from(x).pow(e as u32);
        }
        acc
    }
}

impl std::ops::Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(*e, c.clone());
        }
        out
    }
}

impl std::ops::Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl std::ops::Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (*e, -c)).collect() }
    }
}

impl std::ops::Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero();
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea + eb, ca * cb);
            }
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let unit = mag.is_one();
            match *e {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !unit {
                        write!(f, "{mag}")?;
                    }
                    if *e == 1 {
                        write!(f, "t")?;
                    } else {
                        write!(f, "t^{e}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Serialized as the list of coefficients from `t^lo` upward, with `lo`.
#[derive(Serialize, Deserialize)]
struct Repr {
    lo: i64,
    coeffs: Vec<String>,
}

impl Serialize for LaurentPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Repr { lo: self.min_exp().unwrap_or(0), coeffs: self.coeffs().iter().map(|c| c.to_string()).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = Repr::deserialize(d)?;
        let mut p = LaurentPoly::zero();
        for (i, c) in r.coeffs.iter().enumerate() {
            let c: BigInt = c.parse().map_err(serde::de::Error::custom)?;
            p.add_term(r.lo + i as i64, c);
        }
        Ok(p)
    }
}

/// Determinant by fraction-free (Bareiss) elimination; every division is exact.
pub fn determinant(mut m: Vec<Vec<LaurentPoly>>) -> Result<LaurentPoly> {
    let n = m.len();
    if m.iter().any(|row| row.len() != n) {
        return Err(GermError::InvalidInput("determinant of a non-square matrix".into()));
    }
    if n == 0 {
        return Ok(LaurentPoly::one());
    }
    let mut sign = false;
    let mut prev = LaurentPoly::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            let Some(r) = (k + 1..n).find(|&r| !m[r][k].is_zero()) else {
                return Ok(LaurentPoly::zero());
            };
            m.swap(k, r);
            sign = !sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.div_exact(&prev)?;
            }
            m[i][k] = LaurentPoly::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    Ok(if sign { -&det } else { det })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(c: &[i64]) -> LaurentPoly {
        LaurentPoly::from_coeffs(c)
    }

    #[test]
    fn normal_form_removes_units() {
        let trefoil = p(&[1, -1, 1]);
        assert_eq!(trefoil.shift(-5).normalized(), trefoil);
        assert_eq!((-&trefoil.shift(3)).normalized(), trefoil);
        assert_eq!(trefoil.to_string(), "t^2 - t + 1");
        assert_eq!(p(&[1, -3, 1]).to_string(), "t^2 - 3t + 1");
        assert_eq!(LaurentPoly::one().to_string(), "1");
    }

    #[test]
    fn exact_division() {
        let a = p(&[1, -1, 1]);
        let b = p(&[1, -3, 1]);
        let ab = &a * &b;
        assert_eq!(ab.div_exact(&a).unwrap(), b);
        assert!(p(&[1, 0, 1]).div_exact(&p(&[1, 1])).is_err());
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        // det [[1-t, t], [-1, 1-t]] = (1-t)^2 + t = t^2 - t + 1
        let m = vec![vec![p(&[1, -1]), p(&[0, 1])], vec![p(&[-1]), p(&[1, -1])]];
        assert_eq!(determinant(m).unwrap(), p(&[1, -1, 1]));
        // needs a row swap
        let m = vec![vec![p(&[0]), p(&[2])], vec![p(&[3]), p(&[1, 1])]];
        assert_eq!(determinant(m).unwrap(), p(&[-6]));
        let big: Vec<Vec<LaurentPoly>> = (0..6)
            .map(|i| (0..6).map(|j| if i == j { p(&[1, 1]) } else if j == i + 1 { p(&[-1]) } else { p(&[0]) }).collect())
            .collect();
        assert_eq!(determinant(big).unwrap(), p(&[1, 6, 15, 20, 15, 6, 1]));
    }

    #[test]
    fn serde_roundtrip() {
        let a = p(&[1, -3, 1]).shift(-1);
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"lo":-1,"coeffs":["1","-3","1"]}"#);
        let back: LaurentPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
    }
}
