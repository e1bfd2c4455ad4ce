//! Polynomials in `(x, y, t)` with exact rational coefficients.
//!
//! The `t` exponent may be any non-negative rational so that terms such as
//! `t^k` with non-integer `k` or `t^(2p)` for a fractional `p` stay exact.
//! Evaluation near the origin goes through [`ScaledPoly`], which divides out
//! the lowest total degree after substituting `x = tX, y = tY`.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{GermError, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub x: u32,
    pub y: u32,
    pub t: Rational,
}

impl Monomial {
    pub fn new(x: u32, y: u32, t: Rational) -> Self {
        Self { x, y, t }
    }

    /// Total degree with `t` counted like `x` and `y`.
    pub fn degree(&self) -> Rational {
        Rational::int((self.x + self.y) as i64) + self.t
    }

    fn key(&self) -> String {
        if self.t.is_integer() {
            format!("{},{},{}", self.x, self.y, self.t.numer())
        } else {
            format!("{},{},{}", self.x, self.y, self.t)
        }
    }

    fn parse_key(s: &str) -> Result<Self> {
        let mut it = s.split(',');
        let bad = || GermError::Parse(format!("bad monomial key {s:?}"));
        let x = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let y = it.next().ok_or_else(bad)?.trim().parse().map_err(|_| bad())?;
        let t: Rational = it.next().ok_or_else(bad)?.parse()?;
        if it.next().is_some() || t < Rational::zero() {
            return Err(bad());
        }
        Ok(Self { x, y, t })
    }
}

/// Sparse polynomial in `x, y, t`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, 0, 0, Rational::zero())
    }

    pub fn term(c: Rational, x: u32, y: u32, t: Rational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::new(x, y, t), c);
        p
    }

    pub fn x() -> Self {
        Self::term(Rational::one(), 1, 0, Rational::zero())
    }

    pub fn y() -> Self {
        Self::term(Rational::one(), 0, 1, Rational::zero())
    }

    pub fn t() -> Self {
        Self::t_pow(Rational::one())
    }

    pub fn t_pow(e: Rational) -> Self {
        Self::term(Rational::one(), 0, 0, e)
    }

    pub fn int(c: i64) -> Self {
        Self::constant(Rational::int(c))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when no monomial involves `x` or `y`.
    pub fn is_t_only(&self) -> bool {
        self.terms.keys().all(|m| m.x == 0 && m.y == 0)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: Rational) -> Self {
        let mut out = Self::zero();
        for (m, k) in &self.terms {
            out.add_term(*m, *k * c);
        }
        out
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::int(1);
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    pub fn eval(&self, x: f64, y: f64, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.to_f64() * x.powi(m.x as i32) * y.powi(m.y as i32) * m.t.pow_of(t))
            .sum()
    }

    /// Lowest total degree among the terms (zero for the zero polynomial).
    pub fn min_degree(&self) -> Rational {
        self.terms.keys().map(Monomial::degree).min().unwrap_or_default()
    }

    /// Part of lowest total degree; its zero set at `t = 1` is the tangent cone section.
    pub fn initial_form(&self) -> Self {
        let d = self.min_degree();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if m.degree() == d {
                out.add_term(*m, *c);
            }
        }
        out
    }

    /// `t^(-d) F(tX, tY, t)` with `d` the lowest total degree.
    pub fn at_scale(&self, t: f64) -> ScaledPoly {
        let d = self.min_degree();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.x, m.y, c.to_f64() * (m.degree() - d).pow_of(t)))
            .filter(|&(_, _, c)| c != 0.0)
            .collect();
        ScaledPoly::new(terms)
    }
}

impl std::ops::Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, *c);
        }
        out
    }
}

impl std::ops::Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -*c);
        }
        out
    }
}

impl std::ops::Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &rhs.terms {
                out.add_term(Monomial::new(a.x + b.x, a.y + b.y, a.t + b.t), *ca * *cb);
            }
        }
        out
    }
}

impl std::ops::Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-Rational::one())
    }
}

macro_rules! owned_ops {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr for Poly {
            type Output = Poly;
            fn $m(self, rhs: Poly) -> Poly {
                std::ops::$tr::$m(&self, &rhs)
            }
        }
    };
}
owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            if m.x > 0 {
                write!(f, "x^{}", m.x)?;
            }
            if m.y > 0 {
                write!(f, "y^{}", m.y)?;
            }
            if !m.t.is_zero() {
                write!(f, "t^({})", m.t)?;
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let map: BTreeMap<String, String> =
            self.terms.iter().map(|(m, c)| (m.key(), c.to_string())).collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let map = BTreeMap::<String, String>::deserialize(d)?;
        let mut p = Poly::zero();
        for (k, v) in map {
            let m = Monomial::parse_key(&k).map_err(serde::de::Error::custom)?;
            let c: Rational = v.parse().map_err(serde::de::Error::custom)?;
            p.add_term(m, c);
        }
        Ok(p)
    }
}

/// A polynomial in the rescaled plane coordinates `(X, Y)` with float coefficients.
#[derive(Clone, Debug)]
pub struct ScaledPoly {
    terms: Vec<(u32, u32, f64)>,
    max_x: u32,
    max_y: u32,
}

impl ScaledPoly {
    fn new(terms: Vec<(u32, u32, f64)>) -> Self {
        let max_x = terms.iter().map(|t| t.0).max().unwrap_or(0);
        let max_y = terms.iter().map(|t| t.1).max().unwrap_or(0);
        Self { terms, max_x, max_y }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, c)| c * x.powi(i as i32) * y.powi(j as i32))
            .sum()
    }

    /// Evaluates with precomputed power tables (`xp[i] = x^i`, `yp[j] = y^j`).
    pub fn eval_with(&self, xp: &[f64], yp: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(i, j, c)| c * xp[i as usize] * yp[j as usize])
            .sum()
    }

    pub fn max_x_degree(&self) -> u32 {
        self.max_x
    }

    pub fn max_y_degree(&self) -> u32 {
        self.max_y
    }

    /// Coefficients (low to high) of the univariate polynomial `Y -> P(x, Y)`.
    pub fn column(&self, x: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.max_y as usize + 1];
        for &(i, j, c) in &self.terms {
            out[j as usize] += c * x.powi(i as i32);
        }
        out
    }
}

pub fn powers(v: f64, n: u32) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut acc = 1.0;
    for _ in 0..=n {
        out.push(acc);
        acc *= v;
    }
    out
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &k| acc * x + k)
}

/// Real roots of `sum c[i] x^i` inside `[lo, hi]`, sorted ascending.
///
/// Roots are isolated between consecutive critical points (found recursively
/// from the derivative) and refined by bisection, so arbitrarily close simple
/// roots are separated. A critical point where the value is exactly zero is
/// reported once.
pub fn real_roots(c: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let mut deg = c.len();
    while deg > 0 && c[deg - 1] == 0.0 {
        deg -= 1;
    }
    if deg <= 1 {
        return Vec::new();
    }
    let c = &c[..deg];
    if deg == 2 {
        let r = -c[0] / c[1];
        return if r >= lo && r <= hi { vec![r] } else { Vec::new() };
    }
    let deriv: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, &k)| k * i as f64).collect();
    let mut knots = vec![lo];
    knots.extend(real_roots(&deriv, lo, hi).into_iter().filter(|&r| r > lo && r < hi));
    knots.push(hi);

    let mut roots: Vec<f64> = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (horner(c, a), horner(c, b));
        if fa == 0.0 {
            if roots.last().map_or(true, |&r| r != a) {
                roots.push(a);
            }
            continue;
        }
        if fa.signum() == fb.signum() || fb == 0.0 {
            continue;
        }
        let (mut a, mut b, mut fa_) = (a, b, fa);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = horner(c, m);
            if fm == 0.0 {
                a = m;
                b = m;
                break;
            }
            if fm.signum() == fa_.signum() {
                a = m;
                fa_ = fm;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    if horner(c, hi) == 0.0 && roots.last().map_or(true, |&r| r != hi) {
        roots.push(hi);
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn arithmetic_cancels_exactly() {
        let x = Poly::x();
        let t = Poly::t();
        let a = &(&x - &t).pow(2) - &(&x.pow(2) + &t.pow(2));
        // (x - t)^2 - x^2 - t^2 = -2xt
        assert_eq!(a, Poly::term(Rational::int(-2), 1, 0, Rational::one()));
        assert!((&a - &a).is_zero());
    }

    #[test]
    fn rational_t_exponents_combine() {
        let p = &Poly::t_pow(r(5, 4)) * &Poly::t_pow(r(3, 4));
        assert_eq!(p, Poly::t_pow(Rational::int(2)));
    }

    #[test]
    fn eval_and_scaled_eval_agree() {
        // ((x - t)^2 + y^2 - t^2)((x + t)^2 + y^2 - t^2) - t^5
        let (x, y, t) = (Poly::x(), Poly::y(), Poly::t());
        let c1 = &(&(&x - &t).pow(2) + &y.pow(2)) - &t.pow(2);
        let c2 = &(&(&x + &t).pow(2) + &y.pow(2)) - &t.pow(2);
        let f = &(&c1 * &c2) - &t.pow(5);
        assert_eq!(f.min_degree(), Rational::int(4));
        let tt = 0.125;
        let s = f.at_scale(tt);
        for &(xx, yy) in &[(0.3, 0.7), (-1.5, 0.2), (2.0, -1.0)] {
            let direct = f.eval(tt * xx, tt * yy, tt) / tt.powi(4);
            assert!((direct - s.eval(xx, yy)).abs() < 1e-12);
        }
    }

    #[test]
    fn initial_form_of_example_quartic() {
        let (x, y, t) = (Poly::x(), Poly::y(), Poly::t());
        let q = &(&x.pow(2) + &y.pow(2)).pow(2) - &(&Poly::int(4) * &(&x.pow(2) * &t.pow(2)));
        let f = &q - &Poly::t_pow(r(11, 2));
        assert_eq!(f.initial_form(), q);
    }

    #[test]
    fn serde_roundtrip_with_fractional_exponent() {
        let p = &Poly::term(r(1, 16), 2, 0, Rational::zero()) - &Poly::t_pow(r(5, 2));
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains("\"0,0,5/2\":\"-1/1\""), "{s}");
        let back: Poly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn roots_of_close_pair_are_separated() {
        // (Y - e)(Y + e)(Y - 2) with e tiny
        let e = 1e-9;
        let c = [2.0 * e * e, -e * e, -2.0, 1.0];
        let roots = real_roots(&c, -3.0, 3.0);
        assert_eq!(roots.len(), 3);
        assert!((roots[0] + e).abs() < 1e-20);
        assert!((roots[1] - e).abs() < 1e-20);
        assert!((roots[2] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn roots_respect_interval() {
        let c = [-1.0, 0.0, 1.0];
        assert_eq!(real_roots(&c, 0.0, 3.0), vec![1.0]);
        assert!(real_roots(&[1.0, 0.0, 1.0], -3.0, 3.0).is_empty());
    }
}
