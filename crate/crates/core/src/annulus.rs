//! q-differentials `f(t)(dt/t)^q` on annuli: dominant terms, good coordinates,
//! q-residues and orientation reversal.
//!
//! Series on an annulus are exact in the exponent range; precision lives in the
//! sup-norm. A term `a·t^e` is measured against a reference line `c + m·v` by its
//! relative gap `min_{v ∈ {v_lo, v_hi}} (ν(a) + e·v − c − m·v)`, and terms with gap
//! at least the working precision are discarded.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{binomial, fmt_q, q, q_from_json, q_to_json, qi, Q};
use crate::scalar::{ValuedScalar, DEFAULT_PRECISION};
use crate::series::{LaurentSeries, ScalarSeries};

/// Round limit for the good-coordinate iteration.
pub const MAX_ROUNDS: usize = 64;
/// Extra relative precision carried internally so the final check meets the target.
const GUARD: i64 = 4;

/// The `ν(t)`-range `[v_lo, v_hi]` of an annulus skeleton.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusWindow {
    v_lo: Q,
    v_hi: Q,
    induced: bool,
}

impl AnnulusWindow {
    pub fn new(v_lo: Q, v_hi: Q) -> Result<Self> {
        if v_lo >= v_hi {
            return Err(Error::Precondition(format!(
                "annulus window needs v_lo < v_hi, got [{}, {}]",
                fmt_q(&v_lo),
                fmt_q(&v_hi)
            )));
        }
        Ok(AnnulusWindow { v_lo, v_hi, induced: true })
    }

    pub fn lo(&self) -> &Q {
        &self.v_lo
    }

    pub fn hi(&self) -> &Q {
        &self.v_hi
    }

    pub fn length(&self) -> Q {
        &self.v_hi - &self.v_lo
    }

    /// Whether the orientation is the induced one (coordinate decreasing).
    pub fn is_induced(&self) -> bool {
        self.induced
    }

    /// The window seen from `s = 1/t`.
    pub fn mirrored(&self) -> Self {
        AnnulusWindow { v_lo: -&self.v_hi, v_hi: -&self.v_lo, induced: !self.induced }
    }

    /// The window in `ν(y)` for `t = y^q`.
    pub fn pullback(&self, q_: u32) -> Self {
        let k = qi(q_ as i64);
        AnnulusWindow { v_lo: &self.v_lo / &k, v_hi: &self.v_hi / &k, induced: self.induced }
    }

    fn endpoints(&self) -> [&Q; 2] {
        [&self.v_lo, &self.v_hi]
    }

    /// Relative gap of a term of valuation `val` at exponent `e` against `c + m·v`.
    fn gap(&self, val: &Q, e: i64, c: &Q, m: i64) -> Q {
        let d = qi(e - m);
        let a = val + &d * &self.v_lo - c;
        let b = val + &d * &self.v_hi - c;
        if a < b {
            a
        } else {
            b
        }
    }

    /// Smallest relative gap over all terms (`None` for the zero series).
    fn min_gap(&self, s: &ScalarSeries, c: &Q, m: i64) -> Option<Q> {
        s.terms().filter_map(|(e, a)| a.lower_bound().map(|val| self.gap(&val, *e, c, m))).min()
    }

    /// Discards everything of relative gap at least `prec` against `c + m·v`.
    fn prune(&self, s: &ScalarSeries, c: &Q, m: i64, prec: &Q) -> ScalarSeries {
        LaurentSeries::exact(s.terms().map(|(e, a)| (*e, a.truncate(&self.cap(*e, c, m, prec)))))
    }

    fn prune_unit(&self, s: &ScalarSeries, prec: &Q) -> ScalarSeries {
        self.prune(s, &Q::zero(), 0, prec)
    }

    fn cap(&self, e: i64, c: &Q, m: i64, prec: &Q) -> Q {
        let d = qi(m - e);
        c + prec + std::cmp::max(&d * &self.v_lo, &d * &self.v_hi)
    }

    /// Product pruned against `c + m·v`, truncating operands before multiplying.
    fn mul_rel(&self, a: &ScalarSeries, b: &ScalarSeries, c: &Q, m: i64, prec: &Q) -> ScalarSeries {
        let base = c + prec;
        let mut caps: HashMap<i64, Q> = HashMap::new();
        let bs: Vec<(i64, &ValuedScalar, Q)> =
            b.terms().filter_map(|(e, y)| y.lower_bound().map(|l| (*e, y, l))).collect();
        let mut out: BTreeMap<i64, ValuedScalar> = BTreeMap::new();
        for (e1, x) in a.terms() {
            let Some(l1) = x.lower_bound() else { continue };
            for (e2, y, l2) in &bs {
                let e = e1 + e2;
                let cap = caps.entry(e).or_insert_with(|| {
                    let d = m - e;
                    let v = if d >= 0 { &self.v_hi } else { &self.v_lo };
                    &base + qi(d) * v
                });
                if &l1 + l2 >= *cap {
                    continue;
                }
                let p = x.mul_trunc(y, cap);
                match out.get_mut(&e) {
                    Some(slot) => slot.add_assign(&p),
                    None => {
                        out.insert(e, p);
                    }
                }
            }
        }
        LaurentSeries::exact(out)
    }

    fn mul_unit(&self, a: &ScalarSeries, b: &ScalarSeries, prec: &Q) -> ScalarSeries {
        self.mul_rel(a, b, &Q::zero(), 0, prec)
    }

    fn require_small(&self, h: &ScalarSeries) -> Result<()> {
        match self.min_gap(h, &Q::zero(), 0) {
            Some(g) if !g.is_positive() => {
                Err(Error::Precondition(format!("series is not small on the annulus (gap {})", fmt_q(&g))))
            }
            _ => Ok(()),
        }
    }

    /// `Σ_m coeff(m)·h^m` for small `h`, summed until terms fall below precision.
    fn unit_series(&self, h: &ScalarSeries, prec: &Q, coeff: impl Fn(u64) -> Q) -> Result<ScalarSeries> {
        self.require_small(h)?;
        let h = self.prune_unit(h, prec);
        let mut acc = ScalarSeries::monomial(ValuedScalar::from_rational(coeff(0)), 0);
        let mut term = ScalarSeries::one();
        let mut m = 0u64;
        loop {
            m += 1;
            term = self.mul_unit(&term, &h, prec);
            if term.is_zero() {
                break;
            }
            let c = coeff(m);
            if !c.is_zero() {
                acc = acc.add(&term.scale_q(&c));
            }
        }
        Ok(self.prune_unit(&acc, prec))
    }

    /// `(1 + h)^expo`.
    fn unit_pow(&self, h: &ScalarSeries, expo: &Q, prec: &Q) -> Result<ScalarSeries> {
        self.unit_series(h, prec, |m| binomial(expo, m))
    }

    /// `log(1 + h)`.
    fn unit_log(&self, h: &ScalarSeries, prec: &Q) -> Result<ScalarSeries> {
        self.unit_series(h, prec, |m| {
            if m == 0 {
                Q::zero()
            } else {
                let s = if m % 2 == 1 { 1 } else { -1 };
                q(s, m as i64)
            }
        })
    }

    /// `exp(h)`.
    fn unit_exp(&self, h: &ScalarSeries, prec: &Q) -> Result<ScalarSeries> {
        self.unit_series(h, prec, |m| {
            let mut f = Q::one();
            for k in 1..=m {
                f /= qi(k as i64);
            }
            f
        })
    }

    pub fn to_json(&self) -> Value {
        json!({"lo": q_to_json(&self.v_lo), "hi": q_to_json(&self.v_hi), "induced": self.induced})
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let get = |k: &str| v.get(k).ok_or_else(|| Error::parse(path, format!("window needs \"{k}\"")));
        let mut w = AnnulusWindow::new(
            q_from_json(get("lo")?, &format!("{path}.lo"))?,
            q_from_json(get("hi")?, &format!("{path}.hi"))?,
        )?;
        if let Some(b) = v.get("induced") {
            w.induced = b.as_bool().ok_or_else(|| Error::parse(path, "\"induced\" must be a boolean"))?;
        }
        Ok(w)
    }
}

/// The index `n` whose term strictly dominates every other term on the window.
pub fn dominant_index(f: &ScalarSeries, w: &AnnulusWindow) -> Result<i64> {
    if !f.is_exact() {
        return Err(Error::InsufficientPrecision(
            "annulus forms need every exponent known; the series has an unknown tail".to_string(),
        ));
    }
    if f.is_zero() {
        return Err(Error::NoDominantTerm("series is zero to precision".to_string()));
    }
    let mut winner: Option<i64> = None;
    for v in w.endpoints() {
        let mut vals: Vec<(Q, i64)> =
            f.terms().map(|(e, a)| (a.valuation().unwrap() + qi(*e) * v, *e)).collect();
        vals.sort();
        if vals.len() > 1 && vals[0].0 == vals[1].0 {
            return Err(Error::NoDominantTerm(format!(
                "terms t^{} and t^{} tie at v = {}",
                vals[0].1,
                vals[1].1,
                fmt_q(v)
            )));
        }
        let n = vals[0].1;
        if winner.is_some_and(|m| m != n) {
            return Err(Error::NoDominantTerm(format!(
                "dominant term changes from t^{} to t^{n} inside the window",
                winner.unwrap()
            )));
        }
        winner = Some(n);
    }
    let n = winner.unwrap();
    let an = f.coeff(n);
    let c = an.valuation().unwrap().clone();
    for (e, a) in f.terms() {
        if let Some(p) = a.precision() {
            if (*e == n || !w.gap(p, *e, &c, n).is_positive()) && (*e != n || p <= &c) {
                return Err(Error::InsufficientPrecision(format!(
                        "coefficient of t^{e} is known only to O(π^{}), not enough to separate it from the dominant term",
                        fmt_q(p)
                    )));
            }
        }
    }
    Ok(n)
}

/// `ξ = f(t)(dt/t)^q` on a window, with a certified dominant index.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnulusQForm {
    f: ScalarSeries,
    q: u32,
    window: AnnulusWindow,
    n: i64,
    prec: Q,
}

impl AnnulusQForm {
    pub fn new(f: ScalarSeries, q_: u32, window: AnnulusWindow) -> Result<Self> {
        if q_ == 0 {
            return Err(Error::Precondition("q must be positive".to_string()));
        }
        let n = dominant_index(&f, &window)?;
        Ok(AnnulusQForm { f, q: q_, window, n, prec: qi(DEFAULT_PRECISION) })
    }

    /// Sets the relative working precision (default 20).
    pub fn with_precision(mut self, prec: Q) -> Self {
        self.prec = prec;
        self
    }

    pub fn series(&self) -> &ScalarSeries {
        &self.f
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn window(&self) -> &AnnulusWindow {
        &self.window
    }

    pub fn dominant(&self) -> i64 {
        self.n
    }

    pub fn precision(&self) -> &Q {
        &self.prec
    }

    /// The reference line `ν(a_n) + n·v`.
    fn line(&self) -> (Q, i64) {
        (self.f.coeff(self.n).valuation().unwrap().clone(), self.n)
    }

    /// The 1-form `ω` on the `q`-fold cover `t = y^q` with `φ*ξ = (qω)^q`,
    /// returned as the coefficients of `ω/(dy/y)` together with the cover window.
    pub fn cover_root(&self) -> Result<(ScalarSeries, AnnulusWindow)> {
        let prec = &self.prec + qi(GUARD);
        let an = self.f.coeff(self.n);
        let ainv = an.inv()?;
        let lambda = ScalarSeries::exact(
            self.f.terms().filter(|(e, _)| **e != self.n).map(|(e, a)| (e - self.n, a.mul(&ainv))),
        );
        let root = self.window.unit_pow(&lambda, &q(1, self.q as i64), &prec)?;
        let b = an.nth_root(self.q)?;
        let omega = root.pullback(self.q).shift(self.n).scale(&b);
        Ok((omega, self.window.pullback(self.q)))
    }

    /// The same form in the coordinate `s = 1/t` on the mirrored window.
    pub fn reverse_orientation(&self) -> Result<Self> {
        let g = self.f.substitute_inversion(&ValuedScalar::one())?;
        let g = if self.q % 2 == 1 { g.neg() } else { g };
        let mut out = AnnulusQForm::new(g, self.q, self.window.mirrored())?;
        out.prec = self.prec.clone();
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "q": self.q,
            "window": self.window.to_json(),
            "precision": q_to_json(&self.prec),
            "series": self.f.to_json(),
        })
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let q_ =
            v.get("q")
                .and_then(Value::as_u64)
                .filter(|&x| x > 0 && x <= u32::MAX as u64)
                .ok_or_else(|| Error::parse(path, "form needs a positive integer \"q\""))? as u32;
        let window = AnnulusWindow::from_json(
            v.get("window").ok_or_else(|| Error::parse(path, "form needs a \"window\""))?,
            &format!("{path}.window"),
        )?;
        let f = ScalarSeries::from_json(
            v.get("series").ok_or_else(|| Error::parse(path, "form needs a \"series\""))?,
            &format!("{path}.series"),
        )?;
        let mut form = AnnulusQForm::new(f, q_, window)?;
        if let Some(p) = v.get("precision") {
            form.prec = q_from_json(p, &format!("{path}.precision"))?;
        }
        Ok(form)
    }
}

/// Normal form of a q-differential on an annulus.
#[derive(Clone, Debug, PartialEq)]
pub enum GoodCase {
    /// `(c_n·t^{n/q} + c_0)^q (dt/t)^q` with `q | n`, `n ≠ 0`, `c_0 ≠ 0`.
    Power { n: i64, c_n: ValuedScalar, c_0: ValuedScalar },
    /// `c_n^q·t^n (dt/t)^q`. For `n = 0` the residue is `c_n^q`.
    Monomial { n: i64, c_n: ValuedScalar },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GoodForm {
    pub case: GoodCase,
    pub q: u32,
    /// The coordinate change: `t_new = t·w(t)`.
    pub w: ScalarSeries,
    pub rounds: usize,
    /// Relative precision to which the substitution identity was confirmed.
    pub verified_to: Q,
}

impl GoodForm {
    pub fn n(&self) -> i64 {
        match &self.case {
            GoodCase::Power { n, .. } | GoodCase::Monomial { n, .. } => *n,
        }
    }

    pub fn c_n(&self) -> &ValuedScalar {
        match &self.case {
            GoodCase::Power { c_n, .. } | GoodCase::Monomial { c_n, .. } => c_n,
        }
    }

    pub fn c_0(&self) -> Option<&ValuedScalar> {
        match &self.case {
            GoodCase::Power { c_0, .. } => Some(c_0),
            GoodCase::Monomial { .. } => None,
        }
    }

    pub fn is_power_case(&self) -> bool {
        matches!(self.case, GoodCase::Power { .. })
    }

    /// The q-residue `c_0^q` (or `c_n^q` when `n = 0`, else 0).
    pub fn residue(&self) -> Result<ValuedScalar> {
        match &self.case {
            GoodCase::Power { c_0, .. } => c_0.pow(self.q as i64),
            GoodCase::Monomial { n: 0, c_n } => c_n.pow(self.q as i64),
            GoodCase::Monomial { .. } => Ok(ValuedScalar::zero()),
        }
    }

    /// The normal form as a series in the new coordinate.
    pub fn normal_series(&self) -> Result<ScalarSeries> {
        let q_ = self.q as i64;
        match &self.case {
            GoodCase::Power { n, c_n, c_0 } => {
                let mut terms = Vec::new();
                for k in 0..=q_ {
                    let c = c_n.pow(k)?.mul(&c_0.pow(q_ - k)?).scale_rational(&binomial(&qi(q_), k as u64));
                    terms.push((k * n / q_, c));
                }
                Ok(ScalarSeries::exact(terms))
            }
            GoodCase::Monomial { n, c_n } => Ok(ScalarSeries::monomial(c_n.pow(q_)?, *n)),
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = match &self.case {
            GoodCase::Power { n, c_n, c_0 } => json!({
                "case": "power", "n": n, "c_n": c_n.to_json(), "c_0": c_0.to_json(),
            }),
            GoodCase::Monomial { n, c_n } => json!({
                "case": "monomial", "n": n, "c_n": c_n.to_json(),
            }),
        };
        v["q"] = json!(self.q);
        v["w"] = self.w.to_json();
        v["rounds"] = json!(self.rounds);
        v["verified_to"] = q_to_json(&self.verified_to);
        v
    }

    pub fn from_json(v: &Value, path: &str) -> Result<Self> {
        let get = |k: &str| v.get(k).ok_or_else(|| Error::parse(path, format!("good form needs \"{k}\"")));
        let int = |k: &str| -> Result<i64> {
            get(k)?.as_i64().ok_or_else(|| Error::parse(format!("{path}.{k}"), "expected an integer"))
        };
        let scalar =
            |k: &str| -> Result<ValuedScalar> { ValuedScalar::from_json(get(k)?, &format!("{path}.{k}")) };
        let n = int("n")?;
        let case = match get("case")?.as_str() {
            Some("power") => GoodCase::Power { n, c_n: scalar("c_n")?, c_0: scalar("c_0")? },
            Some("monomial") => GoodCase::Monomial { n, c_n: scalar("c_n")? },
            _ => return Err(Error::parse(format!("{path}.case"), "expected \"power\" or \"monomial\"")),
        };
        let q_ = u32::try_from(int("q")?).map_err(|_| Error::parse(format!("{path}.q"), "q out of range"))?;
        Ok(GoodForm {
            case,
            q: q_,
            w: ScalarSeries::from_json(get("w")?, &format!("{path}.w"))?,
            rounds: int("rounds")? as usize,
            verified_to: q_from_json(get("verified_to")?, &format!("{path}.verified_to"))?,
        })
    }
}

fn equivariant(u: &ScalarSeries, q_: u32) -> bool {
    u.terms().all(|(e, _)| e % q_ as i64 == 0)
}

/// Normalizes `ξ` to a good coordinate and checks the substitution identity.
pub fn good_coordinate(xi: &AnnulusQForm) -> Result<GoodForm> {
    let (mut gf, _) = good_coordinate_traced(xi)?;
    let reached = verify_substitution(xi, &gf)?;
    if reached < xi.prec {
        return Err(Error::InsufficientPrecision(format!(
            "substitution identity holds only to relative precision {}",
            fmt_q(&reached)
        )));
    }
    gf.verified_to = xi.prec.clone();
    Ok(gf)
}

/// The unverified normalization (`verified_to` is 0) together with the unit
/// `U_k` of every round, as series in the cover coordinate `y` with `t = y^q`.
pub fn good_coordinate_traced(xi: &AnnulusQForm) -> Result<(GoodForm, Vec<ScalarSeries>)> {
    let mut trace = Vec::new();
    let prec = &xi.prec + qi(GUARD);
    let (omega, cw) = xi.cover_root()?;
    let n = xi.n;
    let q_ = xi.q;
    let fn_ = omega.coeff(n);
    let fn_inv = fn_.inv()?;
    let c0 = if n != 0 { omega.coeff(0) } else { ValuedScalar::zero() };
    let one = ScalarSeries::one();
    let mut rounds = 1;
    let (case, u) = if n == 0 {
        // ω = f_0·(1 + θ log U)·dy/y, so log U = Σ (f_i/f_0)·y^i/i.
        let g = ScalarSeries::exact(
            omega
                .terms()
                .filter(|(e, _)| **e != 0)
                .map(|(e, a)| (*e, a.mul(&fn_inv).scale_rational(&q(1, *e)))),
        );
        let u = cw.unit_exp(&g, &prec)?;
        (GoodCase::Monomial { n: 0, c_n: fn_ }, u)
    } else {
        let nq = qi(n);
        let h = ScalarSeries::exact(
            omega
                .terms()
                .filter(|(e, _)| **e != 0 && **e != n)
                .map(|(e, a)| (e - n, a.mul(&fn_inv).scale_rational(&(&nq / qi(*e))))),
        );
        let kappa = c0.mul(&fn_inv).scale_rational(&nq);
        let inv_n = Q::one() / &nq;
        let mut u = one.add(&cw.unit_pow(&h, &inv_n, &prec)?.sub(&one));
        let mut prev_gap: Option<Q> = None;
        let mut converged = kappa.is_zero();
        while !converged {
            trace.push(u.clone());
            if !equivariant(&u, q_) {
                return Err(Error::Precondition(format!("round {rounds}: unit is not μ_{q_}-invariant")));
            }
            if rounds >= MAX_ROUNDS {
                return Err(Error::IterationDivergence {
                    rounds,
                    gap: prev_gap.map(|g| fmt_q(&g)).unwrap_or_default(),
                });
            }
            rounds += 1;
            let log_u = cw.unit_log(&u.sub(&one), &prec)?;
            let corr = log_u.shift(-n).scale(&kappa);
            let next = cw.unit_pow(&h.sub(&corr), &inv_n, &prec)?;
            let diff = cw.prune_unit(&next.sub(&u), &prec);
            u = next;
            match cw.min_gap(&diff, &Q::zero(), 0) {
                None => converged = true,
                Some(g) => {
                    if prev_gap.as_ref().is_some_and(|p| &g <= p) {
                        return Err(Error::IterationDivergence { rounds, gap: fmt_q(&g) });
                    }
                    prev_gap = Some(g);
                }
            }
        }
        let case = if c0.is_zero() {
            GoodCase::Monomial { n, c_n: fn_ }
        } else {
            GoodCase::Power { n, c_n: fn_, c_0: c0 }
        };
        (case, u)
    };
    trace.push(u.clone());
    if !equivariant(&u, q_) {
        return Err(Error::Precondition("final unit is not μ_q-invariant".to_string()));
    }
    let w = cw.unit_pow(&u.sub(&one), &qi(q_ as i64), &prec)?.descend(q_)?;
    Ok((GoodForm { case, q: q_, w, rounds, verified_to: Q::zero() }, trace))
}

/// Substitutes `t ↦ t·w(t)` into the normal form and compares with `ξ`;
/// returns the relative precision to which the two agree.
pub fn verify_substitution(xi: &AnnulusQForm, gf: &GoodForm) -> Result<Q> {
    let prec = &xi.prec + qi(GUARD);
    let win = &xi.window;
    let one = ScalarSeries::one();
    let wm1 = gf.w.sub(&one);
    let w_inv = win.unit_pow(&wm1, &qi(-1), &prec)?;
    let ratio = win.mul_unit(&gf.w.theta(), &w_inv, &prec);
    let jac = win.unit_pow(&ratio, &qi(gf.q as i64), &prec)?;
    let (c, m) = xi.line();
    let mut lhs = ScalarSeries::zero();
    for (j, a) in gf.normal_series()?.terms() {
        let wj = win.unit_pow(&wm1, &qi(*j), &prec)?;
        lhs = lhs.add(&wj.scale(a).shift(*j));
    }
    let lhs = win.mul_rel(&lhs, &jac, &c, m, &prec);
    let residual = win.prune(&xi.f.sub(&lhs), &c, m, &prec);
    Ok(win.min_gap(&residual, &c, m).unwrap_or(prec))
}

/// `Res^q` along the annulus.
pub fn q_residue_annulus(xi: &AnnulusQForm) -> Result<ValuedScalar> {
    if xi.n % xi.q as i64 != 0 {
        return Ok(ValuedScalar::zero());
    }
    // The residue of ω is invariant under unit coordinate changes, so the
    // free coefficient of the cover root already equals c_0.
    let (omega, _) = xi.cover_root()?;
    let r = omega.coeff(0).pow(xi.q as i64)?;
    Ok(r.truncate(&(xi.f.coeff(xi.n).valuation().unwrap() + &xi.prec)))
}

pub fn is_q_power(xi: &AnnulusQForm) -> bool {
    xi.n % xi.q as i64 == 0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi(e: i64) -> ValuedScalar {
        ValuedScalar::pi_pow(qi(e))
    }

    fn one() -> ValuedScalar {
        ValuedScalar::one()
    }

    fn win(a: i64, b: i64) -> AnnulusWindow {
        AnnulusWindow::new(qi(a), qi(b)).unwrap()
    }

    fn series(terms: Vec<(i64, ValuedScalar)>) -> ScalarSeries {
        ScalarSeries::exact(terms)
    }

    #[test]
    fn dominant_examples() {
        let f = series(vec![(2, one()), (3, pi(1))]);
        assert_eq!(dominant_index(&f, &win(0, 2)).unwrap(), 2);
        let f = series(vec![(0, one()), (1, one())]);
        assert!(matches!(dominant_index(&f, &win(0, 1)), Err(Error::NoDominantTerm(_))));
        let f = series(vec![(0, pi(1)), (1, one())]);
        assert_eq!(dominant_index(&f, &win(2, 3)).unwrap(), 0);
    }

    fn square_plus(c: ValuedScalar) -> ScalarSeries {
        // (t + c)^2
        series(vec![(2, one()), (1, c.scale_rational(&qi(2))), (0, c.mul(&c))])
    }

    #[test]
    fn already_good() {
        let xi = AnnulusQForm::new(square_plus(pi(2)), 2, win(0, 1)).unwrap();
        let gf = good_coordinate(&xi).unwrap();
        assert!(gf.is_power_case());
        assert_eq!(gf.n(), 2);
        assert!(gf.c_n().eq_to_precision(&one()));
        assert!(gf.c_0().unwrap().eq_to_precision(&pi(2)));
        assert!(gf.w.sub(&ScalarSeries::one()).is_zero());
        assert!(q_residue_annulus(&xi).unwrap().eq_to_precision(&pi(4)));
        assert!(gf.residue().unwrap().eq_to_precision(&pi(4)));
    }

    #[test]
    fn monomial_with_unit_change() {
        let f = series(vec![(2, one()), (3, pi(1))]);
        let xi = AnnulusQForm::new(f, 2, win(0, 2)).unwrap();
        let gf = good_coordinate(&xi).unwrap();
        assert!(!gf.is_power_case());
        assert!(gf.c_n().eq_to_precision(&one()));
        assert!(gf.w.coeff(0).eq_to_precision(&one()));
        assert!(gf.w.coeff(1).eq_to_precision(&pi(1).scale_rational(&q(1, 4))));
        assert!(q_residue_annulus(&xi).unwrap().is_zero());
        assert!(is_q_power(&xi));
    }

    #[test]
    fn indivisible_exponent() {
        let xi = AnnulusQForm::new(series(vec![(3, one())]), 2, win(0, 1)).unwrap();
        let gf = good_coordinate(&xi).unwrap();
        assert_eq!(gf.n(), 3);
        assert!(gf.c_n().pow(2).unwrap().eq_to_precision(&one()));
        assert!(!gf.is_power_case());
        assert!(!is_q_power(&xi));
        assert!(q_residue_annulus(&xi).unwrap().is_zero());
        let rev = xi.reverse_orientation().unwrap();
        assert!(q_residue_annulus(&rev).unwrap().is_zero());
    }

    #[test]
    fn unit_zero_index() {
        let f = series(vec![(0, one()), (1, pi(1))]);
        let xi = AnnulusQForm::new(f, 2, win(0, 1)).unwrap();
        assert!(is_q_power(&xi));
        let gf = good_coordinate(&xi).unwrap();
        assert_eq!(gf.n(), 0);
        assert!(gf.residue().unwrap().eq_to_precision(&one()));
    }

    #[test]
    fn reversal_examples() {
        let xi = AnnulusQForm::new(square_plus(pi(2)), 2, win(0, 1)).unwrap();
        let rev = xi.reverse_orientation().unwrap();
        assert_eq!(rev.dominant(), -2);
        assert_eq!(rev.series(), &series(vec![(-2, one()), (-1, pi(2).scale_rational(&qi(2))), (0, pi(4))]));
        assert_eq!(rev.window().lo(), &qi(-1));
        assert!(!rev.window().is_induced());
        assert!(q_residue_annulus(&rev).unwrap().eq_to_precision(&pi(4)));
        // q = 1: (t + c) dt/t has residue c, reversed −c.
        let c = ValuedScalar::from_int(3).mul(&pi(1));
        let xi = AnnulusQForm::new(
            series(vec![(1, one()), (0, c.clone())]),
            1,
            AnnulusWindow::new(Q::zero(), q(1, 2)).unwrap(),
        )
        .unwrap();
        assert!(q_residue_annulus(&xi).unwrap().eq_to_precision(&c));
        let rev = xi.reverse_orientation().unwrap();
        assert!(q_residue_annulus(&rev).unwrap().eq_to_precision(&c.neg()));
        let back = rev.reverse_orientation().unwrap();
        assert_eq!(back.series(), xi.series());
    }

    #[test]
    fn iteration_with_residue_and_tail() {
        // (t + π^2)^2·(1 + πt^2) on [1/2, 1]: needs the logarithmic correction.
        let base = square_plus(pi(2));
        let f = base.mul(&series(vec![(0, one()), (2, pi(1))]));
        let w = AnnulusWindow::new(q(1, 2), qi(1)).unwrap();
        let xi = AnnulusQForm::new(f, 2, w).unwrap();
        let gf = good_coordinate(&xi).unwrap();
        assert!(gf.is_power_case());
        assert_eq!(gf.n(), 2);
        assert!(gf.rounds >= 2);
        assert!(verify_substitution(&xi, &gf).unwrap() >= qi(DEFAULT_PRECISION));
    }
}
