//! Truncated Laurent series `Σ a_i t^i + O(t^{h+1})` over a coefficient ring.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde_json::Value;

use crate::cyclo::CycloRational;
use crate::error::{Error, Result};
use crate::rational::{binomial, q, qi, Q};
use crate::scalar::ValuedScalar;

/// Default exponent window `[-40, 40]` for expansions that never terminate.
pub const DEFAULT_WINDOW: i64 = 40;

/// Arithmetic needed from series coefficients.
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale_q(&self, r: &Q) -> Self;
    fn inv(&self) -> Result<Self>;
    fn nth_root(&self, k: u32) -> Result<Self>;
    fn pow_i(&self, n: i64) -> Result<Self>;
    fn to_json(&self) -> Value;
    fn from_json(v: &Value, path: &str) -> Result<Self>;
}

impl Coeff for CycloRational {
    fn zero() -> Self {
        CycloRational::zero()
    }
    fn one() -> Self {
        CycloRational::one()
    }
    fn is_zero(&self) -> bool {
        CycloRational::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        CycloRational::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        CycloRational::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        CycloRational::mul(self, o)
    }
    fn neg(&self) -> Self {
        CycloRational::neg(self)
    }
    fn scale_q(&self, r: &Q) -> Self {
        self.scale(r)
    }
    fn inv(&self) -> Result<Self> {
        CycloRational::inv(self)
    }
    fn nth_root(&self, k: u32) -> Result<Self> {
        CycloRational::nth_root(self, k)
    }
    fn pow_i(&self, n: i64) -> Result<Self> {
        self.pow(n)
    }
    fn to_json(&self) -> Value {
        CycloRational::to_json(self)
    }
    fn from_json(v: &Value, path: &str) -> Result<Self> {
        CycloRational::from_json(v, path)
    }
}

impl Coeff for ValuedScalar {
    fn zero() -> Self {
        ValuedScalar::zero()
    }
    fn one() -> Self {
        ValuedScalar::one()
    }
    fn is_zero(&self) -> bool {
        ValuedScalar::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        ValuedScalar::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        ValuedScalar::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        ValuedScalar::mul(self, o)
    }
    fn neg(&self) -> Self {
        ValuedScalar::neg(self)
    }
    fn scale_q(&self, r: &Q) -> Self {
        self.scale_rational(r)
    }
    fn inv(&self) -> Result<Self> {
        ValuedScalar::inv(self)
    }
    fn nth_root(&self, k: u32) -> Result<Self> {
        ValuedScalar::nth_root(self, k)
    }
    fn pow_i(&self, n: i64) -> Result<Self> {
        self.pow(n)
    }
    fn to_json(&self) -> Value {
        ValuedScalar::to_json(self)
    }
    fn from_json(v: &Value, path: &str) -> Result<Self> {
        ValuedScalar::from_json(v, path)
    }
}

/// Coefficients on a finite exponent window. `known_to == None` means the
/// series is an exact Laurent polynomial; `Some(h)` means exponents above `h`
/// are unknown.
#[derive(Clone, PartialEq)]
pub struct LaurentSeries<C> {
    terms: BTreeMap<i64, C>,
    known_to: Option<i64>,
}

pub type ResidueSeries = LaurentSeries<CycloRational>;
pub type ScalarSeries = LaurentSeries<ValuedScalar>;

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl<C: Coeff> LaurentSeries<C> {
    pub fn new(terms: impl IntoIterator<Item = (i64, C)>, known_to: Option<i64>) -> Self {
        let mut map: BTreeMap<i64, C> = BTreeMap::new();
        for (e, c) in terms {
            match map.get_mut(&e) {
                Some(slot) => *slot = slot.add(&c),
                None => {
                    map.insert(e, c);
                }
            }
        }
        let mut s = LaurentSeries { terms: map, known_to };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
        if let Some(h) = self.known_to {
            self.terms.retain(|e, _| *e <= h);
        }
    }

    pub fn exact(terms: impl IntoIterator<Item = (i64, C)>) -> Self {
        Self::new(terms, None)
    }

    pub fn zero() -> Self {
        Self::exact([])
    }

    pub fn one() -> Self {
        Self::monomial(C::one(), 0)
    }

    pub fn monomial(c: C, e: i64) -> Self {
        Self::exact([(e, c)])
    }

    pub fn known_to(&self) -> Option<i64> {
        self.known_to
    }

    pub fn is_exact(&self) -> bool {
        self.known_to.is_none()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&i64, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// No known nonzero coefficient.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i64) -> C {
        self.terms.get(&e).cloned().unwrap_or_else(C::zero)
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn order(&self) -> Option<i64> {
        self.terms.keys().next().copied()
    }

    pub fn max_exponent(&self) -> Option<i64> {
        self.terms.keys().next_back().copied()
    }

    /// Lower bound on the order (`None` for the exact zero series).
    fn order_bound(&self) -> Option<i64> {
        self.order().or(self.known_to.map(|h| h + 1))
    }

    pub fn truncate(&self, h: i64) -> Self {
        Self::new(self.terms.clone(), min_opt(self.known_to, Some(h)))
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.terms.iter().chain(o.terms.iter()).map(|(e, c)| (*e, c.clone())),
            min_opt(self.known_to, o.known_to),
        )
    }

    pub fn neg(&self) -> Self {
        LaurentSeries {
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg())).collect(),
            known_to: self.known_to,
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let kt = match (self.order_bound(), o.order_bound()) {
            (Some(a), Some(b)) => min_opt(self.known_to.map(|h| h + b), o.known_to.map(|h| h + a)),
            // one factor is exactly zero
            _ => None,
        };
        let mut out: BTreeMap<i64, C> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = e1 + e2;
                if kt.is_some_and(|h| e > h) {
                    continue;
                }
                let p = c1.mul(c2);
                match out.get_mut(&e) {
                    Some(slot) => *slot = slot.add(&p),
                    None => {
                        out.insert(e, p);
                    }
                }
            }
        }
        let mut s = LaurentSeries { terms: out, known_to: kt };
        s.normalize();
        s
    }

    pub fn scale(&self, c: &C) -> Self {
        Self::new(self.terms.iter().map(|(e, x)| (*e, x.mul(c))), self.known_to)
    }

    pub fn scale_q(&self, r: &Q) -> Self {
        Self::new(self.terms.iter().map(|(e, x)| (*e, x.scale_q(r))), self.known_to)
    }

    /// Multiplication by `t^k`.
    pub fn shift(&self, k: i64) -> Self {
        LaurentSeries {
            terms: self.terms.iter().map(|(e, c)| (e + k, c.clone())).collect(),
            known_to: self.known_to.map(|h| h + k),
        }
    }

    /// `t·d/dt`.
    pub fn theta(&self) -> Self {
        Self::new(self.terms.iter().map(|(e, c)| (*e, c.scale_q(&qi(*e)))), self.known_to)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> LaurentSeries<D> {
        LaurentSeries::new(self.terms.iter().map(|(e, c)| (*e, f(c))), self.known_to)
    }

    /// Splits `f = a·t^m·(1 + h)`.
    fn unit_split(&self) -> Result<(i64, C, Self)> {
        let m = self.order().ok_or_else(|| {
            Error::PrecisionExhausted("series has no known nonzero coefficient".to_string())
        })?;
        let a = self.coeff(m);
        let ainv = a.inv()?;
        let h = LaurentSeries::new(
            self.terms.iter().skip(1).map(|(e, c)| (e - m, c.mul(&ainv))),
            self.known_to.map(|k| k - m),
        );
        Ok((m, a, h))
    }

    /// `(1 + h)^expo` for `h` supported on positive exponents, known up to
    /// exponent `rel` (capped by the tail of `h`).
    pub fn unit_power(h: &Self, expo: &Q, rel: i64) -> Result<Self> {
        if h.order().is_some_and(|o| o <= 0) {
            return Err(Error::Precondition("unit remainder must have positive order".to_string()));
        }
        let natural = expo >= &Q::zero() && expo.is_integer();
        if h.is_exact() && (h.is_zero() || natural) {
            // finite expansion
            let n = expo.to_integer().try_into().unwrap_or(0u64);
            let mut acc = Self::one();
            for m in 1..=n {
                let term = Self::pow_natural(h, m);
                acc = acc.add(&term.scale_q(&binomial(expo, m)));
            }
            return Ok(acc);
        }
        let cap = min_opt(h.known_to, Some(rel)).unwrap();
        let hh = h.truncate(cap);
        let mut acc = Self::one().truncate(cap);
        let mut term = Self::one();
        let mut m = 0u64;
        loop {
            m += 1;
            term = term.mul(&hh).truncate(cap);
            if term.is_zero() {
                break;
            }
            acc = acc.add(&term.scale_q(&binomial(expo, m)));
        }
        Ok(acc)
    }

    fn pow_natural(f: &Self, n: u64) -> Self {
        let mut acc = Self::one();
        let mut base = f.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        acc
    }

    /// Integer power; negative powers expand the inverse up to `horizon`.
    pub fn pow(&self, n: i64, horizon: i64) -> Result<Self> {
        if n >= 0 {
            return Ok(Self::pow_natural(self, n as u64));
        }
        let (m, a, h) = self.unit_split()?;
        let em = m * n;
        let unit = Self::unit_power(&h, &qi(n), horizon - em)?;
        Ok(unit.scale(&a.pow_i(n)?).shift(em))
    }

    pub fn inverse(&self, horizon: i64) -> Result<Self> {
        self.pow(-1, horizon)
    }

    /// The `q`-th root with principal leading coefficient.
    pub fn nth_root(&self, q_: u32, horizon: i64) -> Result<Self> {
        let (m, a, h) = self.unit_split()?;
        if m % q_ as i64 != 0 {
            return Err(Error::ExponentNotDivisible { exponent: m, q: q_ });
        }
        let em = m / q_ as i64;
        let b = a.nth_root(q_)?;
        let unit = Self::unit_power(&h, &q(1, q_ as i64), horizon - em)?;
        Ok(unit.scale(&b).shift(em))
    }

    /// `f(t·u(t))` for a unit `u = 1 + (positive-order terms)`.
    pub fn substitute_unit(&self, u: &Self, horizon: i64) -> Result<Self> {
        if u.coeff(0) != C::one() || u.order() != Some(0) {
            return Err(Error::Precondition("unit must have leading term 1".to_string()));
        }
        let h = u.sub(&Self::one());
        let mut acc = Self::zero();
        let mut kt = self.known_to;
        for (i, a) in &self.terms {
            let ui = Self::unit_power(&h, &qi(*i), horizon - i)?;
            let term = ui.scale(a).shift(*i);
            kt = min_opt(kt, term.known_to);
            acc = acc.add(&term);
        }
        Ok(Self::new(acc.terms, kt))
    }

    /// `f(K·t^{-1})`; only defined for exact Laurent polynomials.
    pub fn substitute_inversion(&self, k: &C) -> Result<Self> {
        if !self.is_exact() {
            return Err(Error::PrecisionExhausted("inversion of a series with unknown tail".to_string()));
        }
        if k.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let terms =
            self.terms.iter().map(|(e, a)| Ok((-e, a.mul(&k.pow_i(*e)?)))).collect::<Result<Vec<_>>>()?;
        Ok(Self::exact(terms))
    }

    /// The unit `v` with `t·v(t)` inverse to `t·u(t)` under composition.
    pub fn unit_change_inverse(u: &Self, horizon: i64) -> Result<Self> {
        let mut v = Self::one();
        for _ in 0..=horizon.max(1) + 1 {
            let uv = u.substitute_unit(&v, horizon)?;
            let next = uv.inverse(horizon)?.truncate(horizon);
            if next == v {
                break;
            }
            v = next;
        }
        Ok(v)
    }

    /// Pullback along `t = y^q`.
    pub fn pullback(&self, q_: u32) -> Self {
        let k = q_ as i64;
        LaurentSeries {
            terms: self.terms.iter().map(|(e, c)| (e * k, c.clone())).collect(),
            known_to: self.known_to.map(|h| h * k + k - 1),
        }
    }

    /// Inverse of [`pullback`](Self::pullback); every exponent must be divisible by `q`.
    pub fn descend(&self, q_: u32) -> Result<Self> {
        let k = q_ as i64;
        if let Some((e, _)) = self.terms.iter().find(|(e, _)| *e % k != 0) {
            return Err(Error::Precondition(format!(
                "exponent {e} is not divisible by {q_}; series is not μ_{q_}-invariant"
            )));
        }
        Ok(LaurentSeries {
            terms: self.terms.iter().map(|(e, c)| (e / k, c.clone())).collect(),
            known_to: self.known_to.map(|h| h.div_euclid(k)),
        })
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "terms": self.terms.iter().map(|(e, c)| serde_json::json!([e, c.to_json()])).collect::<Vec<_>>(),
            "known_to": self.known_to,
        })
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let ts = v
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::parse(path, "series needs a \"terms\" list"))?;
        let mut terms = Vec::new();
        for (i, t) in ts.iter().enumerate() {
            let tp = format!("{path}.terms[{i}]");
            let a = t
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::parse(&tp, "expected [exponent, coefficient]"))?;
            let e = a[0].as_i64().ok_or_else(|| Error::parse(&tp, "exponent must be an integer"))?;
            terms.push((e, C::from_json(&a[1], &format!("{tp}[1]"))?));
        }
        let known_to = match v.get("known_to") {
            None | Some(Value::Null) => None,
            Some(h) => Some(
                h.as_i64().ok_or_else(|| Error::parse(path, "\"known_to\" must be an integer or null"))?,
            ),
        };
        Ok(Self::new(terms, known_to))
    }
}

impl<C: Coeff> fmt::Display for LaurentSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| match e {
                0 => format!("({c})"),
                1 => format!("({c})*t"),
                _ => format!("({c})*t^{e}"),
            })
            .collect();
        if let Some(h) = self.known_to {
            parts.push(format!("O(t^{})", h + 1));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl<C: Coeff> fmt::Debug for LaurentSeries<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi() -> ValuedScalar {
        ValuedScalar::pi_pow(qi(1))
    }

    fn s(terms: Vec<(i64, ValuedScalar)>) -> ScalarSeries {
        LaurentSeries::exact(terms)
    }

    #[test]
    fn qth_root_examples() {
        // t^2 (1 + πt), q = 2
        let f = s(vec![(2, ValuedScalar::one()), (3, pi())]);
        let g = f.nth_root(2, DEFAULT_WINDOW).unwrap();
        assert_eq!(g.coeff(1), ValuedScalar::one());
        assert_eq!(g.coeff(2), pi().scale_rational(&q(1, 2)));
        assert_eq!(g.coeff(3), pi().pow(2).unwrap().scale_rational(&q(-1, 8)));
        let sq = g.mul(&g);
        for e in 2..=DEFAULT_WINDOW {
            assert!(sq.coeff(e).eq_to_precision(&f.coeff(e)), "exponent {e}");
        }
        let one = ScalarSeries::one();
        assert_eq!(one.nth_root(5, DEFAULT_WINDOW).unwrap(), one);
        let t3 = s(vec![(3, ValuedScalar::one())]);
        assert_eq!(
            t3.nth_root(2, DEFAULT_WINDOW).unwrap_err(),
            Error::ExponentNotDivisible { exponent: 3, q: 2 }
        );
    }

    #[test]
    fn substitution_examples() {
        let t = s(vec![(1, ValuedScalar::one())]);
        let u = s(vec![(0, ValuedScalar::one()), (1, pi())]);
        assert_eq!(
            t.substitute_unit(&u, DEFAULT_WINDOW).unwrap(),
            s(vec![(1, ValuedScalar::one()), (2, pi())])
        );
        let sym = s(vec![(1, ValuedScalar::one()), (-1, ValuedScalar::one())]);
        assert_eq!(sym.substitute_inversion(&ValuedScalar::one()).unwrap(), sym);
        let t2 = s(vec![(2, ValuedScalar::one())]);
        assert_eq!(t2.substitute_inversion(&pi()).unwrap(), s(vec![(-2, pi().pow(2).unwrap())]));
        let trunc = t2.truncate(5);
        assert!(matches!(trunc.substitute_inversion(&pi()), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn unit_change_round_trip() {
        let f = s(vec![(-1, ValuedScalar::one()), (2, pi())]);
        let u = s(vec![(0, ValuedScalar::one()), (1, pi()), (2, ValuedScalar::from_int(3))]);
        let g = f.substitute_unit(&u, 12).unwrap();
        let v = ScalarSeries::unit_change_inverse(&u, 12).unwrap();
        let back = g.substitute_unit(&v, 12).unwrap();
        let kt = back.known_to().unwrap();
        assert!(kt >= 9);
        for e in -1..=kt {
            assert!(back.coeff(e).eq_to_precision(&f.coeff(e)), "exponent {e}");
        }
    }

    #[test]
    fn inverse_and_pullback() {
        let f = s(vec![(1, ValuedScalar::one()), (2, ValuedScalar::one())]);
        let inv = f.inverse(10).unwrap();
        assert_eq!(inv.order(), Some(-1));
        let prod = f.mul(&inv);
        assert_eq!(prod.coeff(0), ValuedScalar::one());
        assert!((1..=prod.known_to().unwrap()).all(|e| prod.coeff(e).is_zero()));
        let p = f.pullback(3);
        assert_eq!(p.order(), Some(3));
        assert_eq!(p.descend(3).unwrap(), f);
        assert!(s(vec![(1, ValuedScalar::one())]).descend(2).is_err());
    }
}
