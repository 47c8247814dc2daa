//! Exact arithmetic in cyclotomic fields `Q(ζ_N)`, the residue field model.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{q_from_json, q_to_json, qi, rational_root, Q};

type Poly = Vec<Q>;

fn trim(p: &mut Poly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_mul(a: &[Q], b: &[Q]) -> Poly {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn poly_sub(a: &[Q], b: &[Q]) -> Poly {
    let mut out = vec![Q::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(&mut out);
    out
}

fn poly_divmod(a: &[Q], b: &[Q]) -> (Poly, Poly) {
    let mut rem: Poly = a.to_vec();
    trim(&mut rem);
    let db = b.len() - 1;
    let lead = b[db].clone();
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let mut quo = vec![Q::zero(); rem.len() - db];
    while rem.len() >= b.len() {
        let shift = rem.len() - 1 - db;
        let c = rem.last().unwrap() / &lead;
        for (j, y) in b.iter().enumerate() {
            rem[shift + j] -= &c * y;
        }
        quo[shift] = c;
        trim(&mut rem);
    }
    trim(&mut quo);
    (quo, rem)
}

fn cyclotomic_poly(n: u32) -> Arc<Poly> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Poly>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut p: Poly = vec![Q::zero(); n as usize + 1];
    p[0] = -Q::one();
    p[n as usize] = Q::one();
    for d in 1..n {
        if n.is_multiple_of(d) {
            let (quo, _) = poly_divmod(&p, &cyclotomic_poly(d));
            p = quo;
        }
    }
    let p = Arc::new(p);
    cache.lock().unwrap().insert(n, p.clone());
    p
}

/// Order of the group of roots of unity contained in `Q(ζ_n)`.
pub fn unity_order(n: u32) -> u32 {
    if n % 2 == 1 {
        2 * n
    } else {
        n
    }
}

/// An element of `Q(ζ_N)` in the power basis, reduced modulo `Φ_N`.
#[derive(Clone)]
pub struct CycloRational {
    conductor: u32,
    coeffs: Poly,
}

impl CycloRational {
    pub fn from_coeffs(conductor: u32, coeffs: Vec<Q>) -> Self {
        assert!(conductor >= 1, "conductor must be positive");
        let phi = cyclotomic_poly(conductor);
        let (_, mut rem) = poly_divmod(&coeffs, &phi);
        trim(&mut rem);
        CycloRational { conductor, coeffs: rem }
    }

    pub fn from_rational(r: Q) -> Self {
        Self::from_coeffs(1, vec![r])
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(qi(n))
    }

    pub fn zero() -> Self {
        CycloRational { conductor: 1, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    /// `ζ_n^j` for the primitive root `e^{2πi/n}`.
    pub fn zeta(n: u32, j: i64) -> Self {
        let e = j.rem_euclid(n as i64) as usize;
        let mut c = vec![Q::zero(); e + 1];
        c[e] = Q::one();
        Self::from_coeffs(n, c)
    }

    /// `e^{2πi j/m}` inside `Q(ζ_n)`, if that field contains it.
    pub fn unity(n: u32, m: u32, j: i64) -> Option<Self> {
        if n.is_multiple_of(m) {
            return Some(Self::zeta(n, (n / m) as i64 * j));
        }
        if n % 2 == 1 && (2 * n).is_multiple_of(m) {
            // ζ_{2n} = −ζ_n^{(n+1)/2} when n is odd
            let e = ((2 * n / m) as i64 * j).rem_euclid(2 * n as i64);
            let z = Self::zeta(n, e * ((n as i64 + 1) / 2));
            return Some(if e % 2 == 1 { z.neg() } else { z });
        }
        None
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[Q] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        cyclotomic_poly(self.conductor).len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_one()
    }

    pub fn as_rational(&self) -> Option<Q> {
        match self.coeffs.len() {
            0 => Some(Q::zero()),
            1 => Some(self.coeffs[0].clone()),
            _ => None,
        }
    }

    /// Re-expresses the element in `Q(ζ_l)` for a multiple `l` of the conductor.
    pub fn lift_to(&self, l: u32) -> Self {
        if l == self.conductor {
            return self.clone();
        }
        assert!(l.is_multiple_of(self.conductor), "conductor {l} is not a multiple of {}", self.conductor);
        let step = (l / self.conductor) as usize;
        let mut c = vec![Q::zero(); self.coeffs.len().saturating_sub(1) * step + 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            c[i * step] = x.clone();
        }
        Self::from_coeffs(l, c)
    }

    fn align(&self, other: &Self) -> (u32, Self, Self) {
        let l = self.conductor.lcm(&other.conductor);
        (l, self.lift_to(l), other.lift_to(l))
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.conductor == other.conductor {
            let mut out = self.clone();
            out.add_assign(other);
            return out;
        }
        let (l, a, b) = self.align(other);
        let mut c = vec![Q::zero(); a.coeffs.len().max(b.coeffs.len())];
        for (i, x) in a.coeffs.iter().enumerate() {
            c[i] += x;
        }
        for (i, y) in b.coeffs.iter().enumerate() {
            c[i] += y;
        }
        trim(&mut c);
        CycloRational { conductor: l, coeffs: c }
    }

    /// `self += other`, in place when conductors agree.
    pub fn add_assign(&mut self, other: &Self) {
        if self.conductor != other.conductor {
            *self = self.add(other);
            return;
        }
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Q::zero());
        }
        for (i, y) in other.coeffs.iter().enumerate() {
            self.coeffs[i] += y;
        }
        trim(&mut self.coeffs);
    }

    pub fn neg(&self) -> Self {
        CycloRational { conductor: self.conductor, coeffs: self.coeffs.iter().map(|x| -x).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.coeffs.len() <= 1 && other.coeffs.len() <= 1 {
            let coeffs = match (self.coeffs.first(), other.coeffs.first()) {
                (Some(a), Some(b)) => vec![a * b],
                _ => Vec::new(),
            };
            return CycloRational { conductor: self.conductor.lcm(&other.conductor), coeffs };
        }
        let (l, a, b) = self.align(other);
        Self::from_coeffs(l, poly_mul(&a.coeffs, &b.coeffs))
    }

    pub fn scale(&self, r: &Q) -> Self {
        let mut c: Poly = self.coeffs.iter().map(|x| x * r).collect();
        trim(&mut c);
        CycloRational { conductor: self.conductor, coeffs: c }
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        // extended Euclid against Φ_N
        let m = cyclotomic_poly(self.conductor);
        let (mut r0, mut r1) = ((*m).clone(), self.coeffs.clone());
        let (mut s0, mut s1): (Poly, Poly) = (Vec::new(), vec![Q::one()]);
        while r1.len() > 1 {
            let (quo, rem) = poly_divmod(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&quo, &s1));
            r0 = std::mem::replace(&mut r1, rem);
            s0 = std::mem::replace(&mut s1, s2);
        }
        let g = r1[0].clone();
        let c: Poly = s1.iter().map(|x| x / &g).collect();
        Ok(Self::from_coeffs(self.conductor, c))
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// Value under the complex embedding `ζ_N ↦ e^{2πik/N}`.
    pub fn embed(&self, k: u32) -> Complex64 {
        let n = self.conductor as f64;
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let ang = 2.0 * PI * (i as f64) * (k as f64) / n;
                Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), ang)
            })
            .sum()
    }

    /// All `k`-th roots of `self` in `Q(ζ_N)`; the first entry is the
    /// principal one (positive real root for positive rationals).
    pub fn nth_roots(&self, k: u32) -> Result<Vec<Self>> {
        assert!(k >= 1);
        if self.is_zero() {
            return Ok(vec![Self::zero()]);
        }
        let r0 = self.find_root(k).ok_or_else(|| {
            Error::RootNotRepresentable(format!("{k}-th root of {self} in Q(ζ_{})", self.conductor))
        })?;
        let n = self.conductor;
        let g = (k).gcd(&unity_order(n));
        Ok((0..g as i64).map(|j| r0.mul(&Self::unity(n, g, j).expect("g divides unity order"))).collect())
    }

    pub fn nth_root(&self, k: u32) -> Result<Self> {
        Ok(self.nth_roots(k)?.swap_remove(0))
    }

    fn find_root(&self, k: u32) -> Option<Self> {
        if k == 1 {
            return Some(self.clone());
        }
        self.monomial_root(k).or_else(|| self.embedding_root(k))
    }

    /// Roots of elements of the form `ρ·ζ_N^j` with `ρ` rational.
    fn monomial_root(&self, k: u32) -> Option<Self> {
        let n = self.conductor;
        let w = unity_order(n) as i64;
        for j in 0..n as i64 {
            let t = self.mul(&Self::zeta(n, -j));
            let Some(rho) = t.as_rational() else { continue };
            let abs_root = rational_root(&rho.abs(), k)?;
            // phase of self is e^{2πi e2/(2n)}
            let e2 = 2 * j + if rho.is_negative() { n as i64 } else { 0 };
            let two_n = 2 * n as i64;
            for s in 0..w {
                if (s * k as i64 * two_n - e2 * w).rem_euclid(w * two_n) == 0 {
                    let phase = Self::unity(n, w as u32, s)?;
                    return Some(phase.scale(&abs_root).lift_to(n));
                }
            }
            return None;
        }
        None
    }

    /// Numerical search over complex embeddings followed by exact verification.
    fn embedding_root(&self, k: u32) -> Option<Self> {
        let n = self.conductor;
        let phi = self.degree();
        if phi < 2 {
            return None;
        }
        let ks: Vec<u32> = (1..n).filter(|&j| j.gcd(&n) == 1 && 2 * j < n).collect();
        debug_assert_eq!(2 * ks.len(), phi);
        let combos = (k as u128).checked_pow(ks.len() as u32)?;
        if combos > 200_000 {
            return None;
        }
        let mut a = vec![vec![0.0f64; phi]; phi];
        for (r, &kk) in ks.iter().enumerate() {
            for (i, col) in (0..phi).enumerate() {
                let ang = 2.0 * PI * (i as f64) * (kk as f64) / (n as f64);
                a[2 * r][col] = ang.cos();
                a[2 * r + 1][col] = ang.sin();
            }
        }
        let inv = invert(a)?;
        let cands: Vec<Vec<Complex64>> = ks
            .iter()
            .map(|&kk| {
                let z = self.embed(kk);
                let (r, th) = z.to_polar();
                (0..k)
                    .map(|m| {
                        Complex64::from_polar(r.powf(1.0 / k as f64), (th + 2.0 * PI * m as f64) / k as f64)
                    })
                    .collect()
            })
            .collect();
        let mut idx = vec![0usize; ks.len()];
        loop {
            let mut rhs = vec![0.0; phi];
            for (r, &m) in idx.iter().enumerate() {
                rhs[2 * r] = cands[r][m].re;
                rhs[2 * r + 1] = cands[r][m].im;
            }
            let x: Vec<f64> = inv.iter().map(|row| row.iter().zip(&rhs).map(|(p, q)| p * q).sum()).collect();
            if let Some(coeffs) = x.iter().map(|&v| rationalize(v)).collect::<Option<Vec<_>>>() {
                let cand = Self::from_coeffs(n, coeffs);
                if cand.pow(k as i64).ok().as_ref() == Some(self) {
                    return Some(cand);
                }
            }
            let mut p = 0;
            loop {
                if p == idx.len() {
                    return None;
                }
                idx[p] += 1;
                if idx[p] < k as usize {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
        }
    }

    pub fn to_json(&self) -> Value {
        serde_json::json!({
            "n": self.conductor,
            "c": self.coeffs.iter().map(q_to_json).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        match v {
            Value::Object(m) => {
                let n = m
                    .get("n")
                    .and_then(Value::as_u64)
                    .filter(|&n| (1..=10_000).contains(&n))
                    .ok_or_else(|| Error::parse(path, "missing or invalid conductor \"n\""))?;
                let c = m
                    .get("c")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::parse(path, "missing coefficient vector \"c\""))?;
                let coeffs = c
                    .iter()
                    .enumerate()
                    .map(|(i, x)| q_from_json(x, &format!("{path}.c[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Self::from_coeffs(n as u32, coeffs))
            }
            // bare rational shorthand
            _ => Ok(Self::from_rational(q_from_json(v, path)?)),
        }
    }
}

fn invert(mut a: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col];
        for j in 0..n {
            a[col][j] /= p;
            inv[col][j] /= p;
        }
        for i in 0..n {
            if i != col {
                let f = a[i][col];
                if f != 0.0 {
                    for j in 0..n {
                        a[i][j] -= f * a[col][j];
                        inv[i][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    Some(inv)
}

/// Continued-fraction reconstruction with denominators up to 10^8.
fn rationalize(x: f64) -> Option<Q> {
    if !x.is_finite() {
        return None;
    }
    let tol = 1e-9 * x.abs().max(1.0);
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > 100_000_000 {
            return None;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if ((h1 as f64) / (k1 as f64) - x).abs() <= tol {
            return Some(BigRational::new(BigInt::from(h1), BigInt::from(k1)));
        }
        let frac = v - a;
        if frac.abs() < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    None
}

impl PartialEq for CycloRational {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.coeffs == other.coeffs;
        }
        let (_, a, b) = self.align(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycloRational {}

impl fmt::Display for CycloRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let cs = crate::rational::fmt_q(c);
            match i {
                0 => write!(f, "{cs}")?,
                1 => write!(f, "({cs})*z{}", self.conductor)?,
                _ => write!(f, "({cs})*z{}^{i}", self.conductor)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for CycloRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn cyclotomic_polys() {
        assert_eq!(cyclotomic_poly(4).len(), 3);
        assert_eq!(cyclotomic_poly(12).len(), 5);
        assert_eq!(CycloRational::one().degree(), 1);
    }

    #[test]
    fn i_squared_is_minus_one() {
        let i = CycloRational::zeta(4, 1);
        assert_eq!(i.mul(&i), CycloRational::from_int(-1));
    }

    #[test]
    fn geometric_sum_vanishes() {
        let mut s = CycloRational::zero();
        for j in 0..6 {
            s = s.add(&CycloRational::zeta(6, j));
        }
        assert!(s.is_zero());
    }

    #[test]
    fn inverse_round_trip() {
        let x = CycloRational::from_coeffs(12, vec![q(3, 2), qi(-1), qi(0), q(2, 7)]);
        assert!(x.mul(&x.inv().unwrap()).is_one());
    }

    #[test]
    fn lift_preserves_value() {
        let x = CycloRational::zeta(4, 1);
        let y = x.lift_to(12);
        assert_eq!(x, y);
        assert_eq!(y.mul(&y), CycloRational::from_int(-1));
    }

    #[test]
    fn roots() {
        let two = CycloRational::from_int(2).lift_to(4);
        assert!(matches!(two.nth_root(2), Err(Error::RootNotRepresentable(_))));
        let two8 = CycloRational::from_int(2).lift_to(8);
        let r = two8.nth_root(2).unwrap();
        assert_eq!(r.mul(&r), two8);
        let m1 = CycloRational::from_int(-1).lift_to(4);
        let roots = m1.nth_roots(2).unwrap();
        assert_eq!(roots.len(), 2);
        for r in &roots {
            assert_eq!(r.mul(r), m1);
        }
        // 2i = (1+i)^2 is not a monomial root
        let two_i = CycloRational::zeta(4, 1).scale(&qi(2));
        let r = two_i.nth_root(2).unwrap();
        assert_eq!(r.mul(&r), two_i);
        let r3 = CycloRational::from_int(-8).nth_root(3).unwrap();
        assert_eq!(r3, CycloRational::from_int(-2));
        let nine = CycloRational::from_rational(q(9, 64));
        assert_eq!(nine.nth_root(2).unwrap(), CycloRational::from_rational(q(3, 8)));
    }

    #[test]
    fn unity_in_odd_conductor() {
        let m = CycloRational::unity(3, 6, 1).unwrap();
        assert_eq!(m.pow(6).unwrap(), CycloRational::one());
        assert_ne!(m.pow(3).unwrap(), CycloRational::one());
    }
}
