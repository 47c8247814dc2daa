//! Helpers around `BigRational` plus the numerator/denominator wire format.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Returns `Some(n)` when `x` is an integer fitting in `i64`.
pub fn as_i64(x: &Q) -> Option<i64> {
    if x.is_integer() {
        x.to_integer().to_i64()
    } else {
        None
    }
}

/// `q` divides the rational `x` (as an integer multiple).
pub fn divisible(x: &Q, q: u32) -> bool {
    let r = x / qi(q as i64);
    r.is_integer()
}

/// Exact `k`-th root of a non-negative rational, when it exists.
pub fn rational_root(x: &Q, k: u32) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    if x.is_zero() {
        return Some(Q::zero());
    }
    let n = int_root(x.numer(), k)?;
    let d = int_root(x.denom(), k)?;
    Some(Q::new(n, d))
}

fn int_root(x: &BigInt, k: u32) -> Option<BigInt> {
    let r = x.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *x {
        Some(r)
    } else {
        None
    }
}

/// Generalized binomial coefficient `binom(e, m)` for rational `e`.
pub fn binomial(e: &Q, m: u64) -> Q {
    let mut acc = Q::one();
    for j in 0..m {
        acc = acc * (e - qi(j as i64)) / qi(j as i64 + 1);
    }
    acc
}

pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

pub fn lcm_u32(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn int_to_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => Value::from(v),
        None => Value::String(x.to_string()),
    }
}

/// Rationals serialize as `[numerator, denominator]`; integers outside the
/// `i64` range are written as decimal strings.
pub fn q_to_json(x: &Q) -> Value {
    Value::Array(vec![int_to_json(x.numer()), int_to_json(x.denom())])
}

fn int_from_json(v: &Value, path: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => {
            n.as_i64().map(BigInt::from).ok_or_else(|| Error::parse(path, "expected an integer"))
        }
        Value::String(s) => {
            s.parse::<BigInt>().map_err(|_| Error::parse(path, format!("bad integer literal {s:?}")))
        }
        _ => Err(Error::parse(path, "expected an integer")),
    }
}

pub fn q_from_json(v: &Value, path: &str) -> Result<Q> {
    match v {
        Value::Array(a) if a.len() == 2 => {
            let n = int_from_json(&a[0], &format!("{path}[0]"))?;
            let d = int_from_json(&a[1], &format!("{path}[1]"))?;
            if d.is_zero() {
                return Err(Error::parse(path, "zero denominator"));
            }
            Ok(Q::new(n, d))
        }
        Value::Number(_) | Value::String(_) => Ok(Q::from_integer(int_from_json(v, path)?)),
        _ => Err(Error::parse(path, "expected [numerator, denominator]")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_rationals() {
        assert_eq!(rational_root(&q(9, 4), 2), Some(q(3, 2)));
        assert_eq!(rational_root(&q(2, 1), 2), None);
        assert_eq!(rational_root(&q(-8, 1), 3), None);
    }

    #[test]
    fn binomial_half() {
        assert_eq!(binomial(&q(1, 2), 2), q(-1, 8));
        assert_eq!(binomial(&qi(3), 4), qi(0));
    }

    #[test]
    fn json_round_trip_big() {
        let x = Q::new(BigInt::from(10).pow(30), BigInt::from(7));
        assert_eq!(q_from_json(&q_to_json(&x), "x").unwrap(), x);
    }
}
