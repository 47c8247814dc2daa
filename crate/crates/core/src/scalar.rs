//! Truncated Puiseux series in the uniformizer π over `Q(ζ_N)`: the model of
//! the valued base field.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;
use serde_json::Value;

use crate::cyclo::CycloRational;
use crate::error::{Error, Result};
use crate::rational::{binomial, fmt_q, q_from_json, q_to_json, qi, Q};

/// Default π-exponent cutoff for results of infinite expansions.
pub const DEFAULT_PRECISION: i64 = 20;

/// `Σ c_j π^{e_j} + O(π^P)`; `prec == None` means the value is exact.
#[derive(Clone)]
pub struct ValuedScalar {
    terms: BTreeMap<Q, CycloRational>,
    prec: Option<Q>,
}

fn min_opt(a: Option<Q>, b: Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(x), Some(y)) => Some(if x < y { x } else { y }),
        (x, None) => x,
        (None, y) => y,
    }
}

fn add_opt(a: &Option<Q>, b: &Option<Q>) -> Option<Q> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

impl ValuedScalar {
    pub fn new(terms: impl IntoIterator<Item = (Q, CycloRational)>, prec: Option<Q>) -> Self {
        let mut map: BTreeMap<Q, CycloRational> = BTreeMap::new();
        for (e, c) in terms {
            match map.get_mut(&e) {
                Some(slot) => slot.add_assign(&c),
                None => {
                    map.insert(e, c);
                }
            }
        }
        let mut s = ValuedScalar { terms: map, prec };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
        if let Some(p) = &self.prec {
            let p = p.clone();
            self.terms.retain(|e, _| *e < p);
        }
    }

    pub fn zero() -> Self {
        ValuedScalar { terms: BTreeMap::new(), prec: None }
    }

    pub fn one() -> Self {
        Self::from_cyclo(CycloRational::one())
    }

    pub fn from_cyclo(c: CycloRational) -> Self {
        Self::monomial(c, Q::zero())
    }

    pub fn from_rational(r: Q) -> Self {
        Self::from_cyclo(CycloRational::from_rational(r))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(qi(n))
    }

    pub fn monomial(c: CycloRational, e: Q) -> Self {
        Self::new([(e, c)], None)
    }

    /// `π^e`.
    pub fn pi_pow(e: Q) -> Self {
        Self::monomial(CycloRational::one(), e)
    }

    pub fn zero_to(prec: Q) -> Self {
        ValuedScalar { terms: BTreeMap::new(), prec: Some(prec) }
    }

    pub fn precision(&self) -> Option<&Q> {
        self.prec.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.prec.is_none()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Q, &CycloRational)> {
        self.terms.iter()
    }

    /// Zero to the declared precision.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn valuation(&self) -> Option<&Q> {
        self.terms.keys().next()
    }

    pub fn leading(&self) -> Option<(&Q, &CycloRational)> {
        self.terms.iter().next()
    }

    /// Valuation, or the precision when zero to precision (`None` for exact zero).
    pub fn lower_bound(&self) -> Option<Q> {
        self.valuation().cloned().or_else(|| self.prec.clone())
    }

    pub fn coeff(&self, e: &Q) -> CycloRational {
        self.terms.get(e).cloned().unwrap_or_else(CycloRational::zero)
    }

    pub fn conductor(&self) -> u32 {
        self.terms.values().fold(1u32, |acc, c| crate::rational::lcm_u32(acc, c.conductor()))
    }

    /// Coefficients re-expressed in `Q(ζ_M)` with `M = lcm(N, n)`.
    pub fn lift_to(&self, n: u32) -> Self {
        ValuedScalar {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), c.lift_to(crate::rational::lcm_u32(c.conductor(), n))))
                .collect(),
            prec: self.prec.clone(),
        }
    }

    /// Drops everything at or above `p`.
    pub fn truncate(&self, p: &Q) -> Self {
        let prec = min_opt(self.prec.clone(), Some(p.clone()));
        let mut s = ValuedScalar { terms: self.terms.clone(), prec };
        s.normalize();
        s
    }

    /// Reduction at level `lambda`: the coefficient of `π^λ`.
    pub fn reduce_at(&self, lambda: &Q) -> Result<CycloRational> {
        if let Some(p) = &self.prec {
            if lambda >= p {
                return Err(Error::PrecisionExhausted(format!(
                    "reduction at level {} needs precision above {}",
                    fmt_q(lambda),
                    fmt_q(p)
                )));
            }
        }
        Ok(self.coeff(lambda))
    }

    /// `(ν(s), reduction at λ)`; `None` stands for the zero sentinel.
    pub fn valuation_and_reduce(&self, lambda: &Q) -> Result<(Option<Q>, CycloRational)> {
        let red = self.reduce_at(lambda)?;
        Ok((self.valuation().cloned(), red))
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(
            self.terms.iter().chain(other.terms.iter()).map(|(e, c)| (e.clone(), c.clone())),
            min_opt(self.prec.clone(), other.prec.clone()),
        )
    }

    /// `self += other` without rebuilding the term map.
    pub fn add_assign(&mut self, other: &Self) {
        for (e, c) in &other.terms {
            match self.terms.get_mut(e) {
                Some(slot) => slot.add_assign(c),
                None => {
                    self.terms.insert(e.clone(), c.clone());
                }
            }
        }
        self.prec = min_opt(self.prec.take(), other.prec.clone());
        self.normalize();
    }

    pub fn neg(&self) -> Self {
        ValuedScalar {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg())).collect(),
            prec: self.prec.clone(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_capped(other, None)
    }

    /// Product truncated at `cap`, skipping work above it.
    pub fn mul_trunc(&self, other: &Self, cap: &Q) -> Self {
        self.mul_capped(other, Some(cap.clone()))
    }

    fn mul_capped(&self, other: &Self, cap: Option<Q>) -> Self {
        let prec = min_opt(
            min_opt(add_opt(&self.prec, &other.lower_bound()), add_opt(&other.prec, &self.lower_bound())),
            cap,
        );
        let mut out: BTreeMap<Q, CycloRational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1 + e2;
                if prec.as_ref().is_some_and(|p| e >= *p) {
                    break;
                }
                let p = c1.mul(c2);
                match out.get_mut(&e) {
                    Some(slot) => slot.add_assign(&p),
                    None => {
                        out.insert(e, p);
                    }
                }
            }
        }
        let mut s = ValuedScalar { terms: out, prec };
        s.normalize();
        s
    }

    pub fn scale(&self, c: &CycloRational) -> Self {
        let mut s = ValuedScalar {
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x.mul(c))).collect(),
            prec: self.prec.clone(),
        };
        s.normalize();
        s
    }

    pub fn scale_rational(&self, r: &Q) -> Self {
        let mut s = ValuedScalar {
            terms: self.terms.iter().map(|(e, x)| (e.clone(), x.scale(r))).collect(),
            prec: self.prec.clone(),
        };
        s.normalize();
        s
    }

    /// Multiplies by `π^e`.
    pub fn shift(&self, e: &Q) -> Self {
        ValuedScalar {
            terms: self.terms.iter().map(|(x, c)| (x + e, c.clone())).collect(),
            prec: self.prec.as_ref().map(|p| p + e),
        }
    }

    /// Splits `s = c·π^e·(1 + u)`, returning `(e, c, u, relative precision)`.
    fn unit_split(&self) -> Result<(Q, CycloRational, ValuedScalar, Option<Q>)> {
        let (e, c) = self
            .leading()
            .ok_or_else(|| Error::PrecisionExhausted("scalar is zero to precision".to_string()))?;
        let (e, c) = (e.clone(), c.clone());
        let cinv = c.inv()?;
        let rel = self.prec.as_ref().map(|p| p - &e);
        let u = ValuedScalar {
            terms: self.terms.iter().skip(1).map(|(x, y)| (x - &e, y.mul(&cinv))).collect(),
            prec: rel.clone(),
        };
        Ok((e, c, u, rel))
    }

    /// `(1 + u)^expo` for `u` of positive valuation, truncated at relative precision.
    fn unit_power(u: &ValuedScalar, expo: &Q, rel: &Option<Q>) -> ValuedScalar {
        if u.terms.is_empty() && rel.is_none() {
            return ValuedScalar::one();
        }
        let cap = rel.clone().unwrap_or_else(|| qi(DEFAULT_PRECISION));
        let u = u.truncate(&cap);
        let mut acc = ValuedScalar::one().truncate(&cap);
        let mut term = ValuedScalar::one();
        let mut m = 0u64;
        loop {
            m += 1;
            term = term.mul(&u).truncate(&cap);
            if term.terms.is_empty() {
                break;
            }
            let b = binomial(expo, m);
            acc = acc.add(&term.scale_rational(&b));
        }
        acc
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (e, c, u, rel) = self.unit_split()?;
        let unit = Self::unit_power(&u, &qi(-1), &rel);
        Ok(unit.scale(&c.inv()?).shift(&-e))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, n: i64) -> Result<Self> {
        let mut base = if n < 0 { self.inv()? } else { self.clone() };
        let mut n = n.unsigned_abs();
        let mut acc = Self::one();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            n >>= 1;
        }
        Ok(acc)
    }

    /// Principal `k`-th root; the leading coefficient must have a root in `Q(ζ_N)`.
    pub fn nth_root(&self, k: u32) -> Result<Self> {
        Ok(self.nth_roots(k)?.swap_remove(0))
    }

    /// All `k`-th roots available over the configured cyclotomic field.
    pub fn nth_roots(&self, k: u32) -> Result<Vec<Self>> {
        if k == 1 {
            return Ok(vec![self.clone()]);
        }
        if self.is_zero() {
            let prec = self.prec.as_ref().map(|p| p / qi(k as i64));
            return Ok(vec![ValuedScalar { terms: BTreeMap::new(), prec }]);
        }
        let (e, c, u, rel) = self.unit_split()?;
        let unit = Self::unit_power(&u, &Q::new(1.into(), (k as i64).into()), &rel);
        let base = unit.shift(&(e / qi(k as i64)));
        Ok(c.nth_roots(k)?.iter().map(|r| base.scale(r)).collect())
    }

    /// Equality to the joint precision of both operands.
    pub fn eq_to_precision(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    pub fn to_json(&self) -> Value {
        let n = self.conductor();
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let cc = c.lift_to(n);
                let mut v: Vec<Value> = cc.coeffs().iter().map(q_to_json).collect();
                if v.is_empty() {
                    v.push(q_to_json(&Q::zero()));
                }
                let ej = q_to_json(e);
                Value::Array(vec![ej[0].clone(), ej[1].clone(), Value::Array(v)])
            })
            .collect();
        serde_json::json!({
            "conductor": n,
            "precision": self.prec.as_ref().map(q_to_json),
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let m = match v {
            Value::Object(m) => m,
            // shorthand: a bare rational
            _ => return Ok(Self::from_rational(q_from_json(v, path)?)),
        };
        let n = m
            .get("conductor")
            .map(|x| x.as_u64().filter(|&n| (1..=10_000).contains(&n)))
            .unwrap_or(Some(1))
            .ok_or_else(|| Error::parse(path, "invalid conductor"))? as u32;
        let prec = match m.get("precision") {
            None | Some(Value::Null) => None,
            Some(p) => Some(q_from_json(p, &format!("{path}.precision"))?),
        };
        let mut terms = Vec::new();
        if let Some(ts) = m.get("terms") {
            let ts = ts.as_array().ok_or_else(|| Error::parse(path, "\"terms\" must be a list"))?;
            for (i, t) in ts.iter().enumerate() {
                let tp = format!("{path}.terms[{i}]");
                let a = t
                    .as_array()
                    .filter(|a| a.len() == 3)
                    .ok_or_else(|| Error::parse(&tp, "expected [num, den, coefficients]"))?;
                let e = q_from_json(&Value::Array(vec![a[0].clone(), a[1].clone()]), &tp)?;
                let cs =
                    a[2].as_array().ok_or_else(|| Error::parse(&tp, "coefficient vector must be a list"))?;
                let coeffs = cs
                    .iter()
                    .enumerate()
                    .map(|(j, x)| q_from_json(x, &format!("{tp}[2][{j}]")))
                    .collect::<Result<Vec<_>>>()?;
                terms.push((e, CycloRational::from_coeffs(n, coeffs)));
            }
        }
        Ok(Self::new(terms, prec))
    }
}

impl PartialEq for ValuedScalar {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.prec == other.prec
    }
}

impl fmt::Display for ValuedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                if e.is_zero() {
                    format!("{c}")
                } else if c.is_one() {
                    format!("pi^{}", fmt_q(e))
                } else {
                    format!("({c})*pi^{}", fmt_q(e))
                }
            })
            .collect();
        if let Some(p) = &self.prec {
            parts.push(format!("O(pi^{})", fmt_q(p)));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for ValuedScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl From<CycloRational> for ValuedScalar {
    fn from(c: CycloRational) -> Self {
        Self::from_cyclo(c)
    }
}
